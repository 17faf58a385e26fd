#pragma once

#include <vector>

#include "metaboltz/discretization.hpp"
#include "metaboltz/ekformula.hpp"

namespace metaboltz {

struct QuasimodeParams {
  double c_gamma = 4.0;        // gamma = min(c_gamma sqrt(h), geometric cap)
  double eps_tilde_factor = 5; // chi threshold band: sigma + eps..2 eps, eps = factor * h
  int quad_per_sqrt_h = 12;    // x-quadrature density
  int nv = 1200;               // v-quadrature points
  double vmax = 0;             // 0: automatic
  int n_hermite = 80;          // Hermite levels for the bilinear form
};

/// Gaussian quasimode f = chi theta exp(-W_m / h) for one non-global minimum
/// (d = 1). theta is the error-function profile of l0 = <nu, (x - s, v)> with
/// the sign fixed so l0 > 0 on the E(m) side; chi is a smoothstep in W.
class Quasimode {
 public:
  double h = 0;
  double gamma = 0;
  double A_h = 0;          // int_0^gamma zeta e^{-s^2/2h}
  double eps_tilde = 0;
  double l0_at_min = 0;
  struct SaddleCut {
    Vec location;  // (s, 0)
    double nu1 = 0, nu2 = 0;
  };
  std::vector<SaddleCut> cuts;
  double sigma = 0;        // sigma(m)
  double Vm = 0;           // V at the minimum
  double detHessM = 0;
  double S = 0;
  // x-hull of the component Omega of {W <= sigma} containing m, with the
  // smooth box edges of supp chi (x-only, so invisible to the Q-form)
  double box_lo = -kInf, box_hi = kInf;
  double box_edge = 0;     // transition width; 0 disables the box

  double theta(double x, double v) const;
  double chi(double x, double v) const;
  double W(double x, double v) const;       // V(x)/2 + v^2/4
  double value(double x, double v) const;   // chi theta e^{-(W - Vm/2)/h}

  /// Hermite coefficients of f on the given x nodes (n = 0..nH-1).
  Mat hermite_coefficients(const Vec& xnodes, int nH, int nv, double vmax) const;

  /// Sampled onto the staggered layout of an assembled operator, normalized.
  Vec sample(const AssembledOperator& op) const;

 private:
  friend Quasimode build_quasimode(const Labeling&, const CollisionModel&,
                                   const Potential&, int, double, const QuasimodeParams&);
  const Potential* P_ = nullptr;
  std::vector<double> zeta_s_, zeta_int_;  // tabulated profile integral on [0, gamma]
};

/// Builds the quasimode for L.minima[which] (must not be the global minimum).
/// Throws CollarOverlap when the l0-slabs of two saddles of j(m) intersect.
Quasimode build_quasimode(const Labeling& L, const CollisionModel& model,
                          const Potential& P, int which, double h,
                          const QuasimodeParams& params = {});

/// Rayleigh data computed two ways: the continuum BGK Hermite bilinear form by
/// quadrature and the assembled-operator quadratic form on the sampled mode.
struct RayleighResult {
  double value_quadrature = 0;  // <Q f, f> / ||f||^2, Hermite route
  double value_discrete = 0;    // <A c, c> / ||c||^2 on the assembled grid
  double x0_term = 0;           // <X0 c, c> / ||c||^2 (skew check)
  double norm_c0 = 0;           // ||f||^2 det(Hess_m V)^{1/2} / (2 pi h)^d
};
RayleighResult rayleigh_quotient(const Quasimode& q, const CollisionModel& model,
                                 const AssembledOperator& op,
                                 const QuasimodeParams& params = {});

/// ||P f||^2, ||P* f||^2 and <P f, f> on the assembled grid (normalized f).
struct ResidualTriple {
  double pf2 = 0, pstarf2 = 0, pff = 0;
};
ResidualTriple quasimode_residual(const Quasimode& q, const AssembledOperator& op);

/// Laplace-method check: compares det(H)^{1/2} (2 pi h)^{-d'/2} int a e^{-(phi-min)/h}
/// with a(x0) for a 2D phase with interior nondegenerate minimum.
struct LaplaceRow {
  double h = 0, ratio = 0, err_over_h = 0;
};
std::vector<LaplaceRow> laplace_check(const std::function<double(double, double)>& phi,
                                      const std::function<double(double, double)>& amp,
                                      const Vec& x0, const Mat& hess,
                                      const std::vector<double>& h_list,
                                      double box_radius = 1.0, int npts = 600);

}  // namespace metaboltz
