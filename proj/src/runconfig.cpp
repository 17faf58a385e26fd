#include "metaboltz/runconfig.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "metaboltz/errors.hpp"

namespace metaboltz {

using nlohmann::json;

namespace {

const std::set<std::string> kStages = {"landscape", "predict", "spectrum", "quasimode",
                                       "semigroup"};
const std::vector<std::string> kStageOrder = {"landscape", "predict", "spectrum",
                                              "quasimode", "semigroup"};

Potential parse_potential(const json& j) {
  if (j.contains("builtin")) {
    Potential P = make_builtin(j.at("builtin").get<std::string>());
    if (j.contains("window")) {
      auto w = j.at("window");
      P.window.lo[0] = w.at(0).get<double>();
      P.window.hi[0] = w.at(1).get<double>();
    }
    return P;
  }
  if (j.contains("poly_coeffs")) {
    auto coeffs = j.at("poly_coeffs").get<std::vector<double>>();
    if (!j.contains("window")) throw ConfigError("potential.window required for poly_coeffs");
    auto w = j.at("window");
    return make_poly1d(coeffs, w.at(0).get<double>(), w.at(1).get<double>());
  }
  if (j.contains("poly2d_terms")) {
    std::vector<Monomial2d> terms;
    for (const auto& t : j.at("poly2d_terms"))
      terms.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<double>()});
    if (!j.contains("window")) throw ConfigError("potential.window required for poly2d_terms");
    auto w = j.at("window");
    Window win;
    win.lo = Vec(2);
    win.hi = Vec(2);
    win.lo << w.at(0).at(0).get<double>(), w.at(1).at(0).get<double>();
    win.hi << w.at(0).at(1).get<double>(), w.at(1).at(1).get<double>();
    return make_poly2d(terms, win);
  }
  throw ConfigError("potential: expected builtin, poly_coeffs, or poly2d_terms");
}

CollisionModel parse_collision(const json& j) {
  const double C = j.value("coercivity_C", 4.0);
  if (j.contains("m0_matrix")) {
    auto vals = j.at("m0_matrix").get<std::vector<double>>();
    const int d = static_cast<int>(std::lround(std::sqrt(double(vals.size()))));
    if (d * d != static_cast<int>(vals.size()))
      throw ConfigError("collision.m0_matrix must be square row-major");
    Mat m0(d, d);
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) m0(i, k) = vals[i * d + k];
    return make_constant_matrix(m0, C);
  }
  const std::string rho = j.value("rho", "mild_relaxation");
  const double scale = j.value("scale", 1.0);
  if (rho == "mild_relaxation") return make_bgk(mild_relaxation_rate(scale), 1, C);
  if (rho == "linear") return make_bgk(linear_rate(scale), 1, C);
  throw ConfigError("collision.rho: expected mild_relaxation or linear, got '" + rho + "'");
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  RunConfig c;
  c.raw_json = j.dump(2);
  c.version = j.value("version", 1);
  if (c.version != 1) throw ConfigError("unsupported config version");
  c.seed = j.value("seed", 20240901u);

  if (!j.contains("potential")) throw ConfigError("missing field: potential");
  c.potential = parse_potential(j.at("potential"));
  c.collision = parse_collision(j.value("collision", json::object()));

  c.h_list = j.value("h_list", std::vector<double>{0.1});
  if (c.h_list.empty()) throw ConfigError("h_list: must be nonempty");
  for (size_t i = 0; i < c.h_list.size(); ++i) {
    if (!(c.h_list[i] > 0 && c.h_list[i] <= 0.5))
      throw ConfigError("h_list: entries must lie in (0, 0.5]");
    if (i > 0 && !(c.h_list[i] < c.h_list[i - 1]))
      throw ConfigError("h_list: must be strictly decreasing");
  }
  c.nx = j.value("nx", 400);
  c.n_hermite = j.value("n_hermite", 30);
  const std::string scheme = j.value("scheme", "central");
  if (scheme == "central")
    c.scheme = Scheme::Central;
  else if (scheme == "upwind")
    c.scheme = Scheme::Upwind;
  else
    throw ConfigError("scheme: expected central or upwind");
  if (j.contains("window"))
    c.window_override = {j.at("window").at(0).get<double>(),
                         j.at("window").at(1).get<double>()};

  c.stages = j.value("stages", std::vector<std::string>{"landscape", "predict"});
  if (c.stages.empty()) throw ConfigError("stages: must be nonempty");
  for (const auto& s : c.stages)
    if (!kStages.count(s)) throw ConfigError("stages: unknown stage '" + s + "'");
  // prerequisites: each enabled stage needs every earlier stage enabled
  for (size_t i = 0; i < kStageOrder.size(); ++i) {
    if (!c.has_stage(kStageOrder[i])) continue;
    for (size_t k = 0; k < i; ++k)
      if (!c.has_stage(kStageOrder[k]))
        throw ConfigError("stages: '" + kStageOrder[i] + "' requires '" + kStageOrder[k] +
                          "'");
  }

  c.grid_resolution = j.value("grid_resolution", 4096);
  c.lift_resolution = j.value("lift_resolution", 1024);
  c.seeds_per_axis = j.value("seeds_per_axis", 24);
  if (c.seeds_per_axis < 8) throw ConfigError("seeds_per_axis: must be >= 8");

  if (j.contains("spectrum")) {
    const auto& s = j.at("spectrum");
    c.spec_count = s.value("count", 4);
    c.spec_tol = s.value("tol", 1e-10);
    if (s.contains("c")) c.spec_c = s.at("c").get<double>();
    c.spec_ctilde_factor = s.value("ctilde_factor", 0.5);
    c.spec_nsamples = s.value("nsamples", 8);
    c.ratio_band = s.value("ratio_band", 0.25);
    c.export_operator = s.value("export_operator", false);
  }
  if (j.contains("quasimode")) {
    const auto& s = j.at("quasimode");
    c.qm_c_gamma = s.value("c_gamma", 4.0);
    c.qm_eps_factor = s.value("eps_tilde_factor", 5.0);
    c.qm_quad_per_sqrt_h = s.value("quad_points_per_sqrt_h", 12);
    c.qm_n_hermite = s.value("n_hermite", 80);
  }
  if (j.contains("semigroup")) {
    const auto& s = j.at("semigroup");
    c.sg_h = s.value("h", 0.0);
    c.sg_t_end = s.value("t_end", 1e6);
    c.sg_steps_per_decade = s.value("steps_per_decade", 20);
    c.sg_plateau_threshold = s.value("plateau_threshold", 1e-3);
    c.sg_u0 = s.value("u0", "quasimode_sum");
  }
  c.out_dir = j.value("out_dir", "out");
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace metaboltz
