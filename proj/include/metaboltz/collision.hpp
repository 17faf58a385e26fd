#pragma once

#include <functional>
#include <string>
#include <utility>

#include "metaboltz/potential.hpp"

namespace metaboltz {

/// Collision rate function rho: R+ -> R+ with rho(0) = 0.
struct RateFunction {
  std::function<double(double)> rho;
  double rhoPrime0 = 0;  // derivative at the origin; equals the rest value of M0
  double rhoInf = 0;     // limit at +infinity (0 when unbounded)
  std::string name;
};

/// rho(t) = scale * t / (1 + t); rho'(0) = scale.
RateFunction mild_relaxation_rate(double scale = 1.0);

/// rho(t) = scale * t; rho'(0) = scale (rhoInf = 0: unbounded).
RateFunction linear_rate(double scale = 1.0);

/// Lower-bound check rho(t) >= t / (C (1 + t)) sampled on [0, 100], plus
/// rho(0) = 0 and the difference-quotient consistency of rhoPrime0.
struct RateCheck {
  double max_bound_violation = 0;
  double rho0 = 0;
  double prime0_err = 0;
  bool ok = false;
};
RateCheck validate_rate(const RateFunction& r, double C);

/// BGK collision operator rho(H0), or an abstract constant matrix M0.
struct CollisionModel {
  enum class Kind { BGK, ConstantMatrix };
  Kind kind = Kind::BGK;
  RateFunction rate;   // BGK
  Mat m0;              // ConstantMatrix
  int dim = 1;
  double coercivity_C = 4.0;
};

CollisionModel make_bgk(RateFunction r, int dim = 1, double coercivity_C = 4.0);
CollisionModel make_constant_matrix(const Mat& m0, double coercivity_C = 4.0);

/// Rest value M0(s, 0, 0): rho'(0) Id for BGK, the stored matrix otherwise.
Mat m0_at_rest(const CollisionModel& model);

/// Diagonal action of rho(H0) on the scaled Hermite basis: entry n is rho(h n)
/// (the action depends only on the total level |n|, any dimension).
/// Throws MatrixKindUnsupported for ConstantMatrix models.
Vec q_hermite_diagonal(const CollisionModel& model, double h, int maxLevel);

/// Ladder matrices on levels 0..maxLevel (d = 1): b lowers with sqrt(h n),
/// b* raises with sqrt(h (n+1)); b*b is diagonal h n; v = b + b*, h d_v = (b - b*)/2.
std::pair<Mat, Mat> ladder_matrices(double h, int maxLevel);

/// Microscopic coercivity: rho(h n) >= h n / (C (1 + h n)) and >= h / C for n >= 1.
struct CoercivityCheck {
  double min_margin = 0;     // min over n >= 1 of rho(hn) - h/C
  double min_bound_margin = 0;
  double entry0 = 0;
  bool ok = false;
};
CoercivityCheck check_coercivity(const CollisionModel& model, double h, int maxLevel);

}  // namespace metaboltz
