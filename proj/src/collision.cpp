#include "metaboltz/collision.hpp"

#include <cmath>

#include "metaboltz/errors.hpp"

namespace metaboltz {

RateFunction mild_relaxation_rate(double scale) {
  RateFunction r;
  r.rho = [scale](double t) { return scale * t / (1.0 + t); };
  r.rhoPrime0 = scale;
  r.rhoInf = scale;
  r.name = "mild_relaxation";
  return r;
}

RateFunction linear_rate(double scale) {
  RateFunction r;
  r.rho = [scale](double t) { return scale * t; };
  r.rhoPrime0 = scale;
  r.rhoInf = 0;
  r.name = "linear";
  return r;
}

RateCheck validate_rate(const RateFunction& r, double C) {
  RateCheck c;
  c.rho0 = r.rho(0.0);
  for (int i = 0; i <= 1000; ++i) {
    const double t = 100.0 * i / 1000.0;
    if (t == 0) continue;
    const double bound = t / (C * (1.0 + t));
    c.max_bound_violation = std::max(c.max_bound_violation, bound - r.rho(t));
  }
  // Richardson extrapolation of the difference quotient at 0
  const double e1 = r.rho(1e-4) / 1e-4, e2 = r.rho(5e-5) / 5e-5;
  c.prime0_err = std::abs(2 * e2 - e1 - r.rhoPrime0);
  c.ok = std::abs(c.rho0) == 0.0 && c.max_bound_violation <= 0 && c.prime0_err < 1e-8;
  return c;
}

CollisionModel make_bgk(RateFunction r, int dim, double coercivity_C) {
  CollisionModel m;
  m.kind = CollisionModel::Kind::BGK;
  m.rate = std::move(r);
  m.dim = dim;
  m.coercivity_C = coercivity_C;
  return m;
}

CollisionModel make_constant_matrix(const Mat& m0, double coercivity_C) {
  CollisionModel m;
  m.kind = CollisionModel::Kind::ConstantMatrix;
  m.m0 = m0;
  m.dim = static_cast<int>(m0.rows());
  m.coercivity_C = coercivity_C;
  return m;
}

Mat m0_at_rest(const CollisionModel& model) {
  if (model.kind == CollisionModel::Kind::BGK)
    return model.rate.rhoPrime0 * Mat::Identity(model.dim, model.dim);
  return model.m0;
}

Vec q_hermite_diagonal(const CollisionModel& model, double h, int maxLevel) {
  if (model.kind != CollisionModel::Kind::BGK)
    throw MatrixKindUnsupported("Hermite-diagonal action requires a BGK model");
  Vec d(maxLevel + 1);
  for (int n = 0; n <= maxLevel; ++n) d[n] = model.rate.rho(h * n);
  return d;
}

std::pair<Mat, Mat> ladder_matrices(double h, int maxLevel) {
  const int n = maxLevel + 1;
  Mat b = Mat::Zero(n, n), bs = Mat::Zero(n, n);
  for (int k = 1; k < n; ++k) b(k - 1, k) = std::sqrt(h * k);
  for (int k = 0; k + 1 < n; ++k) bs(k + 1, k) = std::sqrt(h * (k + 1));
  return {b, bs};
}

CoercivityCheck check_coercivity(const CollisionModel& model, double h, int maxLevel) {
  CoercivityCheck c;
  Vec d = q_hermite_diagonal(model, h, maxLevel);
  c.entry0 = d[0];
  const double C = model.coercivity_C;
  c.min_margin = kInf;
  c.min_bound_margin = kInf;
  for (int n = 1; n <= maxLevel; ++n) {
    c.min_margin = std::min(c.min_margin, d[n] - h / C);
    c.min_bound_margin = std::min(c.min_bound_margin, d[n] - h * n / (C * (1.0 + h * n)));
  }
  c.ok = c.entry0 == 0.0 && c.min_margin >= 0 && c.min_bound_margin >= 0;
  return c;
}

}  // namespace metaboltz
