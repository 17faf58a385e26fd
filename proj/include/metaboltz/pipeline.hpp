#pragma once

#include <string>

#include "metaboltz/runconfig.hpp"

namespace metaboltz {

/// One named pass/fail entry of the run summary.
struct CheckResult {
  std::string name;
  bool pass = false;
  double measured = 0;
  double threshold = 0;
  std::string details;
};

struct RunReport {
  std::vector<CheckResult> checks;
  std::vector<std::string> artifacts;  // files written
  bool all_pass = true;
};

/// Executes the enabled stages in dependency order, writes one artifact file per
/// stage plus summary.json under cfg.out_dir, and returns the check list.
/// Exit contract: nonzero process status iff any enabled check fails.
RunReport run_pipeline(const RunConfig& cfg);

/// Field-wise relative diff of two summary.json files. Throws ShapeMismatch.
struct CompareResult {
  int fields = 0;
  int flagged = 0;
  double max_rel_diff = 0;
  std::string diff_json;
};
CompareResult compare_reports(const std::string& path_a, const std::string& path_b,
                              double rel_threshold = 1e-12);

}  // namespace metaboltz
