#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

#include "metaboltz/collision.hpp"
#include "metaboltz/discretization.hpp"
#include "metaboltz/potential.hpp"

namespace metaboltz {

/// Parsed and validated run configuration (schema version 1).
struct RunConfig {
  int version = 1;
  unsigned seed = 20240901;

  Potential potential;
  CollisionModel collision;

  std::vector<double> h_list;
  int nx = 400;
  int n_hermite = 30;
  Scheme scheme = Scheme::Central;
  std::optional<std::pair<double, double>> window_override;

  std::vector<std::string> stages;  // subset of landscape, predict, spectrum,
                                    // quasimode, semigroup in dependency order
  int grid_resolution = 4096;
  int lift_resolution = 1024;
  int seeds_per_axis = 24;

  // spectrum controls
  int spec_count = 4;
  double spec_tol = 1e-10;
  std::optional<double> spec_c;       // default: 0.25 rho(h)/h surrogate
  double spec_ctilde_factor = 0.5;
  int spec_nsamples = 8;
  double ratio_band = 0.25;
  bool export_operator = false;  // sparse triplet text per h

  // quasimode controls
  double qm_c_gamma = 4.0;
  double qm_eps_factor = 5.0;
  int qm_quad_per_sqrt_h = 12;
  int qm_n_hermite = 80;

  // semigroup controls
  double sg_h = 0;           // 0: first entry of h_list
  double sg_t_end = 1e6;
  int sg_steps_per_decade = 20;
  double sg_plateau_threshold = 1e-3;
  std::string sg_u0 = "quasimode_sum";

  std::string out_dir = "out";
  std::string raw_json;  // the config document as given (echoed into outputs)

  bool has_stage(const std::string& s) const {
    for (const auto& t : stages)
      if (t == s) return true;
    return false;
  }
};

/// Parses a config JSON document. Throws ConfigError with the offending field.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

}  // namespace metaboltz
