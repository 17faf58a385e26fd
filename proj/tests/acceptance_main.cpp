// Acceptance suite: runs every acceptance criterion at its stated tolerance and
// prints one pass/fail line per criterion. Exit status is nonzero when any
// criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

#include "metaboltz/ekformula.hpp"
#include "metaboltz/errors.hpp"
#include "metaboltz/quasimode.hpp"
#include "metaboltz/semigroup.hpp"
#include "metaboltz/spectrum.hpp"
#include "oracles.hpp"

using namespace metaboltz;

namespace {

int g_failures = 0;

void report(int idx, const char* name, bool pass, const std::string& detail) {
  std::printf("%s  criterion %d: %-28s %s\n", pass ? "PASS" : "FAIL", idx, name,
              detail.c_str());
  if (!pass) ++g_failures;
}

struct Landscape1D {
  Potential P;
  Labeling L;
};

Landscape1D landscape_of(const char* name, int res) {
  Potential P = make_builtin(name);
  auto crit = find_critical_points(P, 24);
  auto sa = separating_saddles(P, crit, res);
  return {P, build_labeling(P, crit, sa)};
}

AssembledOperator assemble_of(const Potential& P, const CollisionModel& m, double h,
                              int nx, int nH) {
  AssembleOptions opt;
  opt.h = h;
  opt.nx = nx;
  opt.nHermite = nH;
  opt.tail_check = false;
  return assemble(P, m, opt);
}

// --- criterion 1: prefactor equivalence --------------------------------------
void criterion1() {
  std::mt19937 rng(20240901);
  std::uniform_real_distribution<double> umu(-10.0, -0.01), ur(0.05, 20.0);
  double max_rel = 0, max_det = 0;
  bool pass = true;
  for (int trial = 0; trial < 200; ++trial) {
    const double mu = umu(rng), r = ur(rng);
    const int d = (trial % 2) ? 2 : 1;
    SaddleData sd;
    sd.location = Vec::Zero(d);
    sd.hessV = Mat::Zero(d, d);
    sd.hessV(0, 0) = mu;
    if (d == 2) sd.hessV(1, 1) = 0.5 + 3.0 * (trial % 7) / 7.0;
    sd.mu = mu;
    sd.m0 = r * Mat::Identity(d, d);
    auto sp = phi_eigenproblem(sd);
    auto [a_cf, nu2sq] = bgk_closed_form(mu, r);
    const double rel = std::abs(sp.alpha0 - a_cf) / std::max(1.0, a_cf);
    max_rel = std::max(max_rel, rel);
    max_det = std::max(max_det, sp.detIdentityResidual);
    pass = pass && rel <= 1e-10 && sp.detIdentityResidual <= 1e-8;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "max |alpha0 rel diff| = %.2e (tol 1e-10), max det residual = %.2e (tol 1e-8)",
                max_rel, max_det);
  report(1, "prefactor equivalence", pass, buf);
}

// --- criterion 2: landscape oracle equivalence -------------------------------
void criterion2() {
  bool pass = true;
  double worst_S = 0, worst_lift = 0;
  // S versus the Dijkstra minimax oracle on the labelable wells + the 2D well
  for (const char* name :
       {"tilted_double_well", "wide_double_well", "triple_well", "tilted_double_well_2d"}) {
    Potential P = make_builtin(name);
    const int res = P.dim == 2 ? 512 : 8192;
    auto crit = find_critical_points(P, 24);
    auto sa = separating_saddles(P, crit, res);
    auto L = build_labeling(P, crit, sa);
    for (const auto& e : L.minima) {
      if (e.rank_k == 1) continue;
      const auto& g = *L.grid;
      const double minimax = oracles::dijkstra_minimax(
          g, g.node_near(e.minimum.location),
          g.node_near(L.global_minimum().minimum.location));
      const double S_o = minimax - e.minimum.value / 2;
      const double err = std::abs(e.S - S_o) / L.delta;  // in units of 2 quanta
      worst_S = std::max(worst_S, err * 2);
      pass = pass && std::abs(e.S - S_o) <= L.delta;
    }
  }
  // W-lift separating values match V/2 values (including the symmetric well)
  for (const char* name : {"double_well", "tilted_double_well", "triple_well"}) {
    Potential P = make_builtin(name);
    auto crit = find_critical_points(P, 24);
    auto sa = separating_saddles(P, crit, 4096);
    Labeling L;
    if (std::string(name) == "double_well") {
      L.separating_values = sa.separating_values;
      L.grid = sa.grid;
      L.quantum = sa.quantum;
      L.delta = sa.delta;
      Labeling::Entry e;
      for (const auto& c : crit)
        if (c.index == 0) {
          e.minimum = c;
          break;
        }
      e.rank_k = 1;
      L.minima.push_back(e);
    } else {
      L = build_labeling(P, crit, sa);
    }
    try {
      auto repf = lift_check_W(P, L, std::string(name) == "triple_well" ? 3200 : 1024);
      worst_lift = std::max(worst_lift, repf.max_value_diff);
    } catch (const Error&) {
      pass = false;
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "max |S - minimax| = %.2f quanta (tol 2), max lift value diff = %.2e",
                worst_S, worst_lift);
  report(2, "landscape oracle equivalence", pass, buf);
}

// --- criterion 3: eigenvalue asymptotics -------------------------------------
void criterion3() {
  auto [P, L] = landscape_of("tilted_double_well", 4096);
  auto model = make_bgk(mild_relaxation_rate());
  auto preds = predict(L, model);
  bool pass = preds.size() == 1;
  double prev = kInf, last_dev = kInf;
  std::string devs;
  for (double h : {0.2, 0.1, 0.05}) {
    auto op = assemble_of(P, model, h, 400, 30);
    auto sr = small_eigenvalues(op, 3, 1e-10);
    const auto lam = sr.smallEigs[1];
    pass = pass && lam.real() > 0 && std::abs(lam.imag()) <= 1e-12 * std::abs(lam);
    const double ratio = lam.real() / preds[0].lambda(h);
    const double dev = std::abs(ratio - 1.0);
    pass = pass && dev < prev;
    prev = dev;
    last_dev = dev;
    char b[48];
    std::snprintf(b, sizeof b, " %.4f", dev);
    devs += b;
  }
  pass = pass && last_dev <= 0.25;
  report(3, "eigenvalue asymptotics", pass,
         "|ratio-1| over h = {0.2, 0.1, 0.05}:" + devs + " (strictly decreasing, last <= 0.25)");
}

// --- criterion 4: Rayleigh quotient ------------------------------------------
void criterion4() {
  auto [P, L] = landscape_of("wide_double_well", 4096);
  auto model = make_bgk(linear_rate());
  auto preds = predict(L, model);
  int which = 0;
  for (int i = 0; i < L.n0(); ++i)
    if (L.minima[i].rank_k != 1) which = i;
  bool pass = preds.size() == 1;
  double prev = kInf, last_ratio = 0, worst_x0 = 0;
  std::string ratios;
  for (double h : {0.2, 0.1, 0.05}) {
    auto op = assemble_of(P, model, h, 480, 30);
    Quasimode q = build_quasimode(L, model, P, which, h);
    auto rq = rayleigh_quotient(q, model, op);
    const double ratio = rq.value_quadrature / preds[0].lambda(h);
    pass = pass && rq.value_quadrature > 0 &&
           std::abs(rq.value_discrete / rq.value_quadrature - 1) < 0.05;
    worst_x0 = std::max(worst_x0, std::abs(rq.x0_term) / rq.value_discrete);
    const double dev = std::abs(ratio - 1.0);
    pass = pass && dev < prev;
    prev = dev;
    last_ratio = ratio;
    char b[48];
    std::snprintf(b, sizeof b, " %.4f", ratio);
    ratios += b;
  }
  pass = pass && last_ratio >= 0.9 && last_ratio <= 1.1 && worst_x0 <= 1e-10;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "ratios:%s (monotone to 1, last in [0.9, 1.1]), |<X0 f, f>|/<Pf,f> = %.1e (tol 1e-10)",
                ratios.c_str(), worst_x0);
  report(4, "Rayleigh quotient", pass, buf);
}

// --- criterion 5: structural spectrum properties ------------------------------
void criterion5() {
  auto [P, L] = landscape_of("wide_double_well", 4096);
  auto model = make_bgk(mild_relaxation_rate());
  bool pass = true;
  std::vector<double> h2b;
  double worst_kernel = 0;
  for (double h : {0.2, 0.1, 0.05}) {
    auto op = assemble_of(P, model, h, 480, 30);
    auto sr = small_eigenvalues(op, 4, 1e-10);
    const double c = 0.25 * model.rate.rho(h) / h;
    int inside = 0;
    bool positive = true;
    for (size_t i = 0; i < sr.smallEigs.size(); ++i) {
      if (sr.smallEigs[i].real() <= c * h * h) {
        ++inside;
        if (i > 0) positive = positive && sr.smallEigs[i].real() > 0;
      }
    }
    pass = pass && inside == L.n0() && positive;
    worst_kernel = std::max(worst_kernel, std::abs(sr.smallEigs[0]) / sr.opNorm);
    pass = pass && std::abs(sr.smallEigs[0]) <= 1e-11 * sr.opNorm;
    auto probes = resolvent_probe(op, h, c, 0.5 * c, 6);
    double mx = 0;
    for (auto& [z, b] : probes) mx = std::max(mx, h * h * b);
    h2b.push_back(mx);
  }
  const double spread = *std::max_element(h2b.begin(), h2b.end()) /
                        *std::min_element(h2b.begin(), h2b.end());
  pass = pass && spread <= 3.0;
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "count = n0 at each h, |kernel|/||A|| = %.1e (tol 1e-11), h^2 resolvent spread = %.2f (tol 3)",
                worst_kernel, spread);
  report(5, "structural spectrum", pass, buf);
}

// --- criterion 6: collision coercivity ----------------------------------------
void criterion6() {
  bool pass = true;
  double margin = kInf;
  for (double h : {0.2, 0.1, 0.05}) {
    auto chk = check_coercivity(make_bgk(mild_relaxation_rate(), 1, 4.0), h, 60);
    pass = pass && chk.ok;
    margin = std::min({margin, chk.min_margin, chk.min_bound_margin});
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "rho(hn) >= hn/(C(1+hn)) and >= h/C for n >= 1; min margin = %.3e",
                margin);
  report(6, "collision coercivity", pass, buf);
}

// --- criterion 7: semigroup rate and plateaus ----------------------------------
void criterion7() {
  bool pass = true;
  char buf[240];
  // decay rate on the wide double well at h = 0.1
  double rate_ratio = 0;
  {
    const double h = 0.1;
    auto [P, L] = landscape_of("wide_double_well", 4096);
    auto model = make_bgk(mild_relaxation_rate());
    auto op = assemble_of(P, model, h, 360, 24);
    auto right = small_eigenvalues(op, 3, 1e-10);
    auto left = small_eigenvalues(op, 3, 1e-10, true);
    SpectralProjectors proj(right, left);
    const double lam_star = right.smallEigs[1].real();
    Vec u0 = Vec::Zero(op.size());
    for (int i = 0; i < L.n0(); ++i) {
      if (L.minima[i].rank_k == 1) continue;
      u0 += build_quasimode(L, model, P, i, h).sample(op);
    }
    u0.normalize();
    EvolvePolicy pol;
    pol.t_end = 40.0 * h / lam_star;
    pol.dt_cap = 0.1 * h / lam_star;
    auto run = evolve(op, u0, proj, pol);
    auto fit = decay_rate(run);
    rate_ratio = fit.rate_times_h / lam_star;
    pass = pass && rate_ratio > 0.9 && rate_ratio < 1.1;
  }
  // plateaus on the triple well at h = 0.07
  double onset_ratio = 0, want_ratio = 0;
  size_t nplateau = 0;
  {
    const double h = 0.07;
    auto [P, L] = landscape_of("triple_well", 8192);
    auto model = make_bgk(mild_relaxation_rate());
    auto op = assemble_of(P, model, h, 360, 20);
    auto right = small_eigenvalues(op, 4, 1e-10);
    auto left = small_eigenvalues(op, 4, 1e-10, true);
    SpectralProjectors proj(right, left);
    const double lam_slow = right.smallEigs[1].real();
    Vec u0 = Vec::Zero(op.size());
    for (int i = 0; i < L.n0(); ++i) {
      if (L.minima[i].rank_k == 1) continue;
      u0 += build_quasimode(L, model, P, i, h).sample(op);
    }
    u0.normalize();
    EvolvePolicy pol;
    pol.t_end = 80.0 * h / lam_slow;
    pol.dt_cap = 0.1 * h / lam_slow;
    auto run = evolve(op, u0, proj, pol);
    auto repp = plateau_report(run, 1e-2);
    nplateau = repp.plateaus.size();
    onset_ratio = repp.onset_ratio;
    want_ratio = std::exp(2 * (L.minima[1].S - L.minima[2].S) / h);
    pass = pass && nplateau >= 2 && onset_ratio > want_ratio / 10 &&
           onset_ratio < want_ratio * 10;
  }
  std::snprintf(buf, sizeof buf,
                "decay rate*h/lambda* = %.3f (band [0.9, 1.1]); %zu plateaus, onset ratio %.3g vs exp(2 dS/h) = %.3g (factor 10)",
                rate_ratio, nplateau, onset_ratio, want_ratio);
  report(7, "semigroup rate and plateaus", pass, buf);
}

// --- criterion 8: Laplace method ------------------------------------------------
void criterion8() {
  auto phi_quad = [](double x, double y) { return x * x + 0.5 * y * y + 0.3 * x * y; };
  Mat H(2, 2);
  H << 2.0, 0.3, 0.3, 1.0;
  auto one = [](double, double) { return 1.0; };
  Vec x0 = Vec::Zero(2);
  bool pass = true;
  double worst_quad = 0;
  for (const auto& r : laplace_check(phi_quad, one, x0, H, {0.1, 0.05, 0.025}, 3.2, 1200)) {
    worst_quad = std::max(worst_quad, std::abs(r.ratio - 1.0));
    pass = pass && std::abs(r.ratio - 1.0) <= 1e-6;
  }
  auto phi_cubic = [](double x, double y) {
    return x * x + 0.5 * y * y + 0.2 * x * x * x + 0.1 * y * y * y;
  };
  Mat H2(2, 2);
  H2 << 2.0, 0.0, 0.0, 1.0;
  auto rows = laplace_check(phi_cubic, one, x0, H2, {0.1, 0.05, 0.025}, 1.8, 1200);
  double cmin = kInf, cmax = 0;
  for (const auto& r : rows) {
    cmin = std::min(cmin, std::abs(r.err_over_h));
    cmax = std::max(cmax, std::abs(r.err_over_h));
  }
  pass = pass && (cmax / cmin) < 1.5;
  char buf[160];
  std::snprintf(buf, sizeof buf,
                "quadratic |ratio-1| = %.1e (tol 1e-6); cubic fitted C stable: spread %.2f (tol 1.5)",
                worst_quad, cmax / cmin);
  report(8, "Laplace method", pass, buf);
}

}  // namespace

int main() {
  const auto t0 = std::chrono::steady_clock::now();
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0);
  std::printf("%s: %d/8 criteria passed (%.1f s)\n", g_failures == 0 ? "OK" : "FAILED",
              8 - g_failures, dt.count());
  return g_failures == 0 ? 0 : 1;
}
