#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace metaboltz {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Axis-aligned computational box.
struct Window {
  Vec lo, hi;
  int dim() const { return static_cast<int>(lo.size()); }
  bool contains(const Vec& x, double margin = 0.0) const {
    for (int k = 0; k < dim(); ++k)
      if (x[k] < lo[k] + margin || x[k] > hi[k] - margin) return false;
    return true;
  }
  double extent(int k) const { return hi[k] - lo[k]; }
};

/// Smooth confining energy landscape with gradient and Hessian callables.
struct Potential {
  int dim = 1;
  std::function<double(const Vec&)> eval;
  std::function<Vec(const Vec&)> grad;
  std::function<Mat(const Vec&)> hess;
  Window window;
  std::string name;

  double operator()(const Vec& x) const { return eval(x); }
  double eval1(double x) const { return eval(Vec::Constant(1, x)); }
  double grad1(double x) const { return grad(Vec::Constant(1, x))[0]; }
  double hess1(double x) const { return hess(Vec::Constant(1, x))(0, 0); }
};

/// 1D polynomial sum c_k x^k.
Potential make_poly1d(const std::vector<double>& coeffs, double xlo, double xhi,
                      const std::string& name = "poly1d");

/// 2D polynomial sum of monomial terms (i, j, c) -> c x1^i x2^j.
struct Monomial2d {
  int i, j;
  double c;
};
Potential make_poly2d(const std::vector<Monomial2d>& terms, const Window& window,
                      const std::string& name = "poly2d");

/// Named builtin landscapes used throughout the experiments.
///   double_well          (x^2-1)^2/4                 symmetric, violates Hypothesis 4
///   tilted_double_well   (x^2-1)^2/4 + x/10
///   wide_double_well     0.05 (x^2-4)^2 + 0.02 x     wells near +-2, mild anharmonicity
///   triple_well          (x^6 - 7.5 x^4 + 12 x^2)/11 + 0.01 x
///   double_well_2d       (x1^2-1)^2/4 + x2^2/2       symmetric in x1
///   tilted_double_well_2d (x1^2-1)^2/4 + x1/10 + x2^2/2
Potential make_builtin(const std::string& name);

/// The lifted kinetic energy W(x,v) = V(x)/2 + v^2/4, stored doubled (2W) so
/// that the sublevel-set machinery, which analyzes eval/2, works with W itself
/// (d = 1 only; used by the W-side landscape checks).
Potential make_lifted_2W(const Potential& V, double vmax);

/// Validation report for the Potential type invariants.
struct PotentialCheck {
  double max_grad_fd_rel = 0;   // gradient vs centered differences of eval
  double max_hess_fd_abs = 0;   // hessian vs centered differences of grad
  double max_hess_asym = 0;     // symmetry defect
  double min_boundary_grad = 0; // confinement proxy on the window boundary
  bool ok = false;
};

/// Checks grad/hess against finite differences at `nsample` points drawn with `seed`,
/// and the boundary gradient floor. Throws nothing; inspect `ok`.
PotentialCheck validate_potential(const Potential& P, int nsample = 64,
                                  unsigned seed = 20240901, double grad_floor = 1e-3);

}  // namespace metaboltz
