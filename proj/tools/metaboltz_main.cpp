#include <CLI11.hpp>
#include <Eigen/Core>
#include <cstdlib>
#include <iostream>

#include "metaboltz/errors.hpp"
#include "metaboltz/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"metaboltz: metastable spectra of semiclassical kinetic BGK operators"};
  app.require_subcommand(1);

  std::string config_path, out_dir, stages_csv, h_list_csv;
  bool summary_only = false;
  auto* run = app.add_subcommand("run", "execute pipeline stages from a config file");
  run->add_option("--config", config_path, "config JSON path")->required();
  run->add_option("--stages", stages_csv, "comma-separated stage override");
  run->add_option("--out", out_dir, "output directory override");
  run->add_option("--h-list", h_list_csv, "comma-separated h override");
  run->add_flag("--summary-only", summary_only, "print only the final pass/fail line");

  std::string report_a, report_b;
  double threshold = 1e-12;
  auto* cmp = app.add_subcommand("compare", "field-wise diff of two summary.json files");
  cmp->add_option("a", report_a, "first summary.json")->required();
  cmp->add_option("b", report_b, "second summary.json")->required();
  cmp->add_option("--threshold", threshold, "relative flag threshold");

  CLI11_PARSE(app, argc, argv);

  if (const char* th = std::getenv("METABOLTZ_THREADS"))
    Eigen::setNbThreads(std::max(1, std::atoi(th)));

  try {
    if (run->parsed()) {
      auto cfg = metaboltz::load_config(config_path);
      if (!out_dir.empty()) cfg.out_dir = out_dir;
      if (!stages_csv.empty()) {
        cfg.stages.clear();
        std::stringstream ss(stages_csv);
        std::string item;
        while (std::getline(ss, item, ',')) cfg.stages.push_back(item);
      }
      if (!h_list_csv.empty()) {
        cfg.h_list.clear();
        std::stringstream ss(h_list_csv);
        std::string item;
        while (std::getline(ss, item, ',')) cfg.h_list.push_back(std::stod(item));
      }
      auto rep = metaboltz::run_pipeline(cfg);
      if (!summary_only) {
        for (const auto& c : rep.checks)
          std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << "  measured="
                    << c.measured << " threshold=" << c.threshold << "\n";
        for (const auto& a : rep.artifacts) std::cout << "wrote " << a << "\n";
      }
      std::cout << (rep.all_pass ? "ALL CHECKS PASS" : "CHECK FAILURES") << " ("
                << rep.checks.size() << " checks)\n";
      return rep.all_pass ? 0 : 1;
    }
    if (cmp->parsed()) {
      auto res = metaboltz::compare_reports(report_a, report_b, threshold);
      std::cout << res.diff_json << "\n";
      std::cout << "fields=" << res.fields << " flagged=" << res.flagged
                << " max_rel_diff=" << res.max_rel_diff << "\n";
      return res.flagged == 0 ? 0 : 1;
    }
  } catch (const metaboltz::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
