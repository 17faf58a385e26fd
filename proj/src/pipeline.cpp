#include "metaboltz/pipeline.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "metaboltz/ekformula.hpp"
#include "metaboltz/errors.hpp"
#include "metaboltz/landscape.hpp"
#include "metaboltz/quasimode.hpp"
#include "metaboltz/semigroup.hpp"
#include "metaboltz/spectrum.hpp"

namespace metaboltz {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

json crit_to_json(const CriticalPoint& c) {
  json j;
  j["location"] = vec_to_json(c.location);
  j["index"] = c.index;
  j["value"] = c.value;
  j["hess_eigen"] = vec_to_json(c.hessEigen);
  return j;
}

void write_text(const fs::path& p, const std::string& text, RunReport& rep) {
  std::ofstream out(p);
  out << text;
  rep.artifacts.push_back(p.string());
}

void add_check(RunReport& rep, const std::string& name, bool pass, double measured,
               double threshold, const std::string& details = "") {
  rep.checks.push_back({name, pass, measured, threshold, details});
  rep.all_pass = rep.all_pass && pass;
}

struct StageData {
  std::vector<CriticalPoint> critical;
  SaddleAnalysis saddles;
  Labeling labeling;
  std::vector<EKPrediction> predictions;
  std::map<double, AssembledOperator> ops;   // per h
  std::map<double, SpectralResult> spectra;  // per h
};

AssembledOperator& op_for(const RunConfig& cfg, StageData& data, double h) {
  auto it = data.ops.find(h);
  if (it != data.ops.end()) return it->second;
  AssembleOptions opt;
  opt.h = h;
  opt.nx = cfg.nx;
  opt.nHermite = cfg.n_hermite;
  opt.scheme = cfg.scheme;
  if (cfg.window_override) {
    opt.window_lo = cfg.window_override->first;
    opt.window_hi = cfg.window_override->second;
  }
  // margin precondition: labeled structures at least 4 sqrt(h) from the ends
  const double lo = cfg.window_override ? cfg.window_override->first
                                        : cfg.potential.window.lo[0];
  const double hi = cfg.window_override ? cfg.window_override->second
                                        : cfg.potential.window.hi[0];
  for (const auto& e : data.labeling.minima) {
    const double x = e.minimum.location[0];
    if (x - lo < 4 * std::sqrt(h) || hi - x < 4 * std::sqrt(h))
      throw WindowTooSmall("minimum at " + std::to_string(x) +
                           " closer than 4 sqrt(h) to the window end");
  }
  return data.ops.emplace(h, assemble(cfg.potential, cfg.collision, opt)).first->second;
}

void stage_landscape(const RunConfig& cfg, StageData& data, RunReport& rep,
                     const fs::path& out) {
  auto pc = validate_potential(cfg.potential, 64, cfg.seed);
  add_check(rep, "potential.grad_fd", pc.max_grad_fd_rel < 1e-6, pc.max_grad_fd_rel, 1e-6);
  add_check(rep, "potential.hess_fd", pc.max_hess_fd_abs < 1e-5, pc.max_hess_fd_abs, 1e-5);
  add_check(rep, "potential.boundary_grad", pc.min_boundary_grad >= 1e-3,
            pc.min_boundary_grad, 1e-3);

  data.critical = find_critical_points(cfg.potential, cfg.seeds_per_axis);
  data.saddles = separating_saddles(cfg.potential, data.critical, cfg.grid_resolution);
  data.labeling = build_labeling(cfg.potential, data.critical, data.saddles);

  json j;
  j["critical_points"] = json::array();
  for (const auto& c : data.critical) j["critical_points"].push_back(crit_to_json(c));
  j["separating_values"] = data.labeling.separating_values;
  j["energy_quantum"] = data.saddles.grid->energy_quantum();
  j["minima"] = json::array();
  for (const auto& e : data.labeling.minima) {
    json m;
    m["minimum"] = crit_to_json(e.minimum);
    m["rank"] = e.rank_k;
    m["j"] = e.j;
    m["sigma"] = e.sigma == kInf ? json("inf") : json(e.sigma);
    m["S"] = e.S == kInf ? json("inf") : json(e.S);
    m["region_interval"] = {e.region_lo, e.region_hi};
    m["saddles"] = json::array();
    for (const auto& s : e.saddles) m["saddles"].push_back(crit_to_json(s));
    j["minima"].push_back(m);
  }
  if (cfg.potential.dim == 1) {
    auto lift = lift_check_W(cfg.potential, data.labeling, cfg.lift_resolution);
    j["lift_W"] = {{"v_values", lift.v_values},
                   {"w_values", lift.w_values},
                   {"max_value_diff", lift.max_value_diff},
                   {"max_saddle_v_offset", lift.max_saddle_v_offset}};
    add_check(rep, "landscape.lift_W_match", true, lift.max_value_diff,
              2 * data.saddles.grid->energy_quantum());
  }
  add_check(rep, "landscape.n0", data.labeling.n0() >= 2, data.labeling.n0(), 2);
  write_text(out / "landscape.json", j.dump(2), rep);
}

void stage_predict(const RunConfig& cfg, StageData& data, RunReport& rep,
                   const fs::path& out) {
  data.predictions = predict(data.labeling, cfg.collision);
  json j = json::array();
  for (const auto& p : data.predictions) {
    json e;
    e["minimum"] = crit_to_json(p.minimum);
    e["S"] = p.S;
    e["barrier"] = p.arrhenius;
    e["prefactor_leading"] = p.prefactorLeading;
    json lam = json::object();
    for (double h : cfg.h_list) lam[std::to_string(h)] = p.lambda(h);
    e["lambda"] = lam;
    j.push_back(e);
    add_check(rep, "predict.prefactor_positive", p.prefactorLeading > 0,
              p.prefactorLeading, 0);
    // BGK route agreement with the closed form
    if (cfg.collision.kind == CollisionModel::Kind::BGK) {
      for (const auto& t : p.saddleTerms) {
        // alpha0 from Phi vs closed form, via mu recovered from hessPhiPlus data
        const double nu2sq = t.nu[t.nu.size() - 1] * t.nu[t.nu.size() - 1];
        const double a0_cf = cfg.collision.rate.rhoPrime0 * nu2sq;
        add_check(rep, "predict.bgk_alpha0_agreement",
                  std::abs(t.alpha0 - a0_cf) <= 1e-10 * std::max(1.0, t.alpha0),
                  std::abs(t.alpha0 - a0_cf), 1e-10);
      }
    }
  }
  if (!data.predictions.empty()) {
    const auto& star = select_lambda_star(data.predictions);
    json s;
    s["minimum"] = vec_to_json(star.minimum.location);
    s["S"] = star.S;
    json root;
    root["predictions"] = j;
    root["lambda_star"] = s;
    write_text(out / "predictions.json", root.dump(2), rep);
  } else {
    write_text(out / "predictions.json", json{{"predictions", j}}.dump(2), rep);
  }
}

void stage_spectrum(const RunConfig& cfg, StageData& data, RunReport& rep,
                    const fs::path& out) {
  if (cfg.potential.dim != 1)
    throw ConfigError("spectrum stage requires a 1D potential");
  json spec_summary = json::array();
  std::vector<double> h2bounds;
  for (double h : cfg.h_list) {
    auto& op = op_for(cfg, data, h);
    auto sr = small_eigenvalues(op, cfg.spec_count, cfg.spec_tol);
    const double c = cfg.spec_c ? *cfg.spec_c
                                : 0.25 * (cfg.collision.kind == CollisionModel::Kind::BGK
                                              ? cfg.collision.rate.rho(h) / h
                                              : 1.0);
    const double box = c * h * h;
    int inside = 0;
    for (const auto& lam : sr.smallEigs)
      if (lam.real() <= box) ++inside;
    add_check(rep, "spectrum.count_in_box(h=" + std::to_string(h) + ")",
              inside == data.labeling.n0(), inside, data.labeling.n0());
    add_check(rep, "spectrum.kernel_small(h=" + std::to_string(h) + ")",
              std::abs(sr.smallEigs[0]) <= 1e-11 * sr.opNorm, std::abs(sr.smallEigs[0]),
              1e-11 * sr.opNorm);
    bool repos = true;
    for (size_t i = 1; i < sr.smallEigs.size(); ++i)
      if (sr.smallEigs[i].real() <= box) repos = repos && sr.smallEigs[i].real() > 0;
    add_check(rep, "spectrum.positive_real_parts(h=" + std::to_string(h) + ")", repos, 1,
              1);

    auto rows = match_predictions(sr, data.predictions, h, cfg.ratio_band);
    auto probes = resolvent_probe(op, h, c, cfg.spec_ctilde_factor * c, cfg.spec_nsamples);
    double maxb = 0;
    for (const auto& [z, b] : probes) maxb = std::max(maxb, h * h * b);
    h2bounds.push_back(maxb);

    // CSV artifacts
    std::ostringstream csv;
    csv << std::setprecision(17) << "h,index,re,im,residual,ek_ratio\n";
    for (size_t i = 0; i < sr.smallEigs.size(); ++i) {
      csv << h << "," << i << "," << sr.smallEigs[i].real() << ","
          << sr.smallEigs[i].imag() << "," << sr.residuals[i] << ",";
      if (i >= 1 && i <= rows.size()) csv << rows[i - 1].ratio;
      csv << "\n";
    }
    write_text(out / ("spectrum_h" + std::to_string(h) + ".csv"), csv.str(), rep);
    std::ostringstream rcsv;
    rcsv << std::setprecision(17) << "re_z,im_z,bound,h2_bound\n";
    for (const auto& [z, b] : probes)
      rcsv << z.real() << "," << z.imag() << "," << b << "," << h * h * b << "\n";
    write_text(out / ("resolvent_h" + std::to_string(h) + ".csv"), rcsv.str(), rep);
    if (cfg.export_operator) {
      // sparse triplet text (1-based MatrixMarket coordinate format)
      std::ostringstream mm;
      mm << "%%MatrixMarket matrix coordinate real general\n";
      mm << op.size() << " " << op.size() << " " << op.matrix.nonZeros() << "\n";
      mm << std::setprecision(17);
      for (int k = 0; k < op.matrix.outerSize(); ++k)
        for (SpMat::InnerIterator it(op.matrix, k); it; ++it)
          mm << it.row() + 1 << " " << it.col() + 1 << " " << it.value() << "\n";
      write_text(out / ("operator_h" + std::to_string(h) + ".mtx"), mm.str(), rep);
    }

    json e;
    e["h"] = h;
    e["eigs_re"] = json::array();
    for (const auto& l : sr.smallEigs) e["eigs_re"].push_back(l.real());
    e["ratios"] = json::array();
    for (const auto& r : rows) e["ratios"].push_back(r.ratio);
    e["max_h2_resolvent"] = maxb;
    spec_summary.push_back(e);
    data.spectra.emplace(h, std::move(sr));
  }
  if (h2bounds.size() >= 2) {
    const double lo = *std::min_element(h2bounds.begin(), h2bounds.end());
    const double hi = *std::max_element(h2bounds.begin(), h2bounds.end());
    add_check(rep, "spectrum.resolvent_h2_factor", hi / lo <= 3.0, hi / lo, 3.0);
  }
  write_text(out / "spectrum.json", spec_summary.dump(2), rep);
}

void stage_quasimode(const RunConfig& cfg, StageData& data, RunReport& rep,
                     const fs::path& out) {
  if (cfg.potential.dim != 1)
    throw ConfigError("quasimode stage requires a 1D potential");
  QuasimodeParams qp;
  qp.c_gamma = cfg.qm_c_gamma;
  qp.eps_tilde_factor = cfg.qm_eps_factor;
  qp.quad_per_sqrt_h = cfg.qm_quad_per_sqrt_h;
  qp.n_hermite = cfg.qm_n_hermite;
  json all = json::array();
  for (double h : cfg.h_list) {
    auto& op = op_for(cfg, data, h);
    for (int which = 0; which < data.labeling.n0(); ++which) {
      if (data.labeling.minima[which].rank_k == 1) continue;
      Quasimode q = build_quasimode(data.labeling, cfg.collision, cfg.potential, which, h, qp);
      auto rq = rayleigh_quotient(q, cfg.collision, op, qp);
      auto res = quasimode_residual(q, op);
      double lam_ek = 0;
      for (const auto& p : data.predictions)
        if ((p.minimum.location - data.labeling.minima[which].minimum.location).norm() <
            1e-9)
          lam_ek = p.lambda(h);
      json e;
      e["h"] = h;
      e["minimum_x"] = data.labeling.minima[which].minimum.location[0];
      e["gamma"] = q.gamma;
      e["A_h_over_sqrt_pih2"] = q.A_h / std::sqrt(std::numbers::pi * h / 2);
      e["rayleigh_quadrature"] = rq.value_quadrature;
      e["rayleigh_discrete"] = rq.value_discrete;
      e["x0_term_rel"] = std::abs(rq.x0_term) / std::max(1e-300, rq.value_discrete);
      e["norm_c0"] = rq.norm_c0;
      e["lambda_ek"] = lam_ek;
      e["ratio_vs_ek"] = lam_ek > 0 ? rq.value_quadrature / lam_ek : 0;
      e["pf2_over_pff"] = res.pf2 / res.pff;
      e["pstarf2_over_pff"] = res.pstarf2 / res.pff;
      all.push_back(e);

      // grid CSV of the quasimode samples for plotting
      std::ostringstream pcsv;
      pcsv << std::setprecision(10) << "x,v,f\n";
      const int ngx = 160, ngv = 80;
      const double vmax_p = 2.5;
      for (int ix = 0; ix < ngx; ++ix)
        for (int iv = 0; iv < ngv; ++iv) {
          const double x = op.xmin + (op.xmax - op.xmin) * (ix + 0.5) / ngx;
          const double v = -vmax_p + 2 * vmax_p * (iv + 0.5) / ngv;
          pcsv << x << "," << v << "," << q.value(x, v) << "\n";
        }
      write_text(out / ("quasimode_h" + std::to_string(h) + "_m" +
                        std::to_string(which) + ".csv"),
                 pcsv.str(), rep);

      add_check(rep, "quasimode.x0_skew(h=" + std::to_string(h) + ")",
                std::abs(rq.x0_term) <= 1e-10 * std::max(1e-300, rq.value_discrete),
                std::abs(rq.x0_term) / std::max(1e-300, rq.value_discrete), 1e-10);
      add_check(rep, "quasimode.rq_positive(h=" + std::to_string(h) + ")",
                rq.value_quadrature > 0 && rq.value_discrete > 0, rq.value_quadrature, 0);
      add_check(rep, "quasimode.A_h_upper(h=" + std::to_string(h) + ")",
                q.A_h <= std::sqrt(std::numbers::pi * h / 2), q.A_h,
                std::sqrt(std::numbers::pi * h / 2));
      add_check(rep, "quasimode.residual_order(h=" + std::to_string(h) + ")",
                res.pf2 / res.pff < res.pstarf2 / res.pff, res.pf2 / res.pff,
                res.pstarf2 / res.pff);
    }
  }
  write_text(out / "quasimode.json", all.dump(2), rep);
}

void stage_semigroup(const RunConfig& cfg, StageData& data, RunReport& rep,
                     const fs::path& out) {
  if (cfg.potential.dim != 1)
    throw ConfigError("semigroup stage requires a 1D potential");
  const double h = cfg.sg_h > 0 ? cfg.sg_h : cfg.h_list.front();
  auto& op = op_for(cfg, data, h);
  auto itr = data.spectra.find(h);
  if (itr == data.spectra.end())
    data.spectra.emplace(h, small_eigenvalues(op, cfg.spec_count, cfg.spec_tol));
  const auto& right = data.spectra.at(h);
  auto left = small_eigenvalues(op, cfg.spec_count, cfg.spec_tol, true);
  SpectralProjectors proj(right, left);

  // initial state
  QuasimodeParams qp;
  qp.c_gamma = cfg.qm_c_gamma;
  qp.eps_tilde_factor = cfg.qm_eps_factor;
  Vec u0;
  if (cfg.sg_u0 == "kernel") {
    u0 = op.kernel_vector();
  } else {
    u0 = Vec::Zero(op.size());
    for (int which = 0; which < data.labeling.n0(); ++which) {
      if (data.labeling.minima[which].rank_k == 1) continue;
      Quasimode q =
          build_quasimode(data.labeling, cfg.collision, cfg.potential, which, h, qp);
      u0 += q.sample(op);
      if (cfg.sg_u0.rfind("quasimode:", 0) == 0 &&
          which == std::stoi(cfg.sg_u0.substr(10)))
        break;
    }
    u0.normalize();
  }

  EvolvePolicy pol;
  pol.t_end = cfg.sg_t_end;
  pol.steps_per_decade = cfg.sg_steps_per_decade;
  // step cap resolving the slowest nonzero rate
  double lam_star = 0;
  for (const auto& l : right.smallEigs)
    if (l.real() > 1e-11 * right.opNorm) {
      lam_star = l.real();
      break;
    }
  if (lam_star > 0) pol.dt_cap = 0.1 * h / lam_star;
  auto run = evolve(op, u0, proj, pol);

  std::ostringstream csv;
  csv << std::setprecision(17) << "t,norm,dist_kernel";
  for (int k = 0; k < proj.clusters(); ++k) csv << ",dist_cluster" << k;
  csv << "\n";
  for (const auto& s : run.snaps) {
    csv << s.t << "," << s.norm << "," << s.dist_kernel;
    for (double d : s.dist_cluster) csv << "," << d;
    csv << "\n";
  }
  write_text(out / "semigroup.csv", csv.str(), rep);

  bool monotone = true;
  for (size_t i = 1; i < run.snaps.size(); ++i)
    monotone = monotone && run.snaps[i].norm <= run.snaps[i - 1].norm + 1e-9;
  add_check(rep, "semigroup.norm_monotone", monotone, monotone, 1);

  json j;
  j["h"] = h;
  j["clusters"] = proj.clusters();
  try {
    auto fit = decay_rate(run);
    j["fit_rate_times_h"] = fit.rate_times_h;
    j["fit_residual"] = fit.residual;
    if (lam_star > 0) {
      j["lambda_star_numeric"] = lam_star;
      const double ratio = fit.rate_times_h / lam_star;
      j["rate_ratio"] = ratio;
      add_check(rep, "semigroup.decay_rate_ratio", ratio > 0.9 && ratio < 1.1, ratio, 1.1);
    }
  } catch (const InsufficientWindow& e) {
    j["fit_error"] = e.what();
  }
  try {
    auto pr = plateau_report(run, cfg.sg_plateau_threshold);
    json pl = json::array();
    for (const auto& p : pr.plateaus)
      pl.push_back({{"cluster", p.cluster},
                    {"t_begin", p.t_begin},
                    {"t_end", p.t_end},
                    {"decades", p.decades}});
    j["plateaus"] = pl;
    j["onset_ratio"] = pr.onset_ratio;
  } catch (const NoPlateauDetected& e) {
    j["plateau_error"] = e.what();  // reported, not fatal
  }
  write_text(out / "semigroup.json", j.dump(2), rep);
}

}  // namespace

RunReport run_pipeline(const RunConfig& cfg) {
  RunReport rep;
  fs::path out(cfg.out_dir);
  fs::create_directories(out);
  StageData data;

  if (cfg.has_stage("landscape")) stage_landscape(cfg, data, rep, out);
  if (cfg.has_stage("predict")) stage_predict(cfg, data, rep, out);
  if (cfg.has_stage("spectrum")) stage_spectrum(cfg, data, rep, out);
  if (cfg.has_stage("quasimode")) stage_quasimode(cfg, data, rep, out);
  if (cfg.has_stage("semigroup")) stage_semigroup(cfg, data, rep, out);

  json summary;
  summary["config"] = json::parse(cfg.raw_json);
  summary["checks"] = json::array();
  for (const auto& c : rep.checks)
    summary["checks"].push_back({{"name", c.name},
                                 {"pass", c.pass},
                                 {"measured", c.measured},
                                 {"threshold", c.threshold},
                                 {"details", c.details}});
  summary["pass"] = rep.all_pass;
  json arts = json::array();
  for (const auto& a : rep.artifacts) arts.push_back(a);
  summary["artifacts"] = arts;
  std::ofstream f(out / "summary.json");
  f << summary.dump(2) << "\n";
  rep.artifacts.push_back((out / "summary.json").string());
  return rep;
}

namespace {

void diff_walk(const json& a, const json& b, const std::string& path, double thr,
               CompareResult& res, json& diff) {
  if (a.type() != b.type())
    throw ShapeMismatch("type differs at " + path);
  if (a.is_object()) {
    if (a.size() != b.size()) throw ShapeMismatch("object size differs at " + path);
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key())) throw ShapeMismatch("missing key " + path + "/" + it.key());
      diff_walk(it.value(), b.at(it.key()), path + "/" + it.key(), thr, res, diff);
    }
  } else if (a.is_array()) {
    if (a.size() != b.size()) throw ShapeMismatch("array length differs at " + path);
    for (size_t i = 0; i < a.size(); ++i)
      diff_walk(a.at(i), b.at(i), path + "/" + std::to_string(i), thr, res, diff);
  } else if (a.is_number()) {
    ++res.fields;
    const double x = a.get<double>(), y = b.get<double>();
    const double rel = std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-300});
    res.max_rel_diff = std::max(res.max_rel_diff, rel);
    if (rel > thr) {
      ++res.flagged;
      diff[path] = {{"a", x}, {"b", y}, {"rel", rel}};
    }
  } else {
    ++res.fields;
    if (a != b) {
      ++res.flagged;
      diff[path] = {{"a", a}, {"b", b}};
    }
  }
}

}  // namespace

CompareResult compare_reports(const std::string& path_a, const std::string& path_b,
                              double rel_threshold) {
  std::ifstream fa(path_a), fb(path_b);
  if (!fa || !fb) throw ConfigError("cannot open report files");
  json a = json::parse(fa), b = json::parse(fb);
  CompareResult res;
  json diff = json::object();
  diff_walk(a, b, "", rel_threshold, res, diff);
  res.diff_json = diff.dump(2);
  return res;
}

}  // namespace metaboltz
