#include "metaboltz/potential.hpp"

#include <cmath>
#include <random>

#include "metaboltz/errors.hpp"

namespace metaboltz {

Potential make_poly1d(const std::vector<double>& coeffs, double xlo, double xhi,
                      const std::string& name) {
  auto val = [coeffs](double x) {
    double p = 0;
    for (size_t k = coeffs.size(); k-- > 0;) p = p * x + coeffs[k];
    return p;
  };
  auto der = [coeffs](double x) {
    double p = 0;
    for (size_t k = coeffs.size(); k-- > 1;) p = p * x + coeffs[k] * static_cast<double>(k);
    return p;
  };
  auto der2 = [coeffs](double x) {
    double p = 0;
    for (size_t k = coeffs.size(); k-- > 2;)
      p = p * x + coeffs[k] * static_cast<double>(k) * static_cast<double>(k - 1);
    return p;
  };
  Potential P;
  P.dim = 1;
  P.eval = [val](const Vec& x) { return val(x[0]); };
  P.grad = [der](const Vec& x) { return Vec::Constant(1, der(x[0])); };
  P.hess = [der2](const Vec& x) { return Mat::Constant(1, 1, der2(x[0])); };
  P.window.lo = Vec::Constant(1, xlo);
  P.window.hi = Vec::Constant(1, xhi);
  P.name = name;
  return P;
}

Potential make_poly2d(const std::vector<Monomial2d>& terms, const Window& window,
                      const std::string& name) {
  auto pw = [](double x, int n) { return n <= 0 ? 1.0 : std::pow(x, n); };
  Potential P;
  P.dim = 2;
  P.eval = [terms, pw](const Vec& x) {
    double s = 0;
    for (const auto& t : terms) s += t.c * pw(x[0], t.i) * pw(x[1], t.j);
    return s;
  };
  P.grad = [terms, pw](const Vec& x) {
    Vec g = Vec::Zero(2);
    for (const auto& t : terms) {
      if (t.i > 0) g[0] += t.c * t.i * pw(x[0], t.i - 1) * pw(x[1], t.j);
      if (t.j > 0) g[1] += t.c * t.j * pw(x[0], t.i) * pw(x[1], t.j - 1);
    }
    return g;
  };
  P.hess = [terms, pw](const Vec& x) {
    Mat H = Mat::Zero(2, 2);
    for (const auto& t : terms) {
      if (t.i > 1) H(0, 0) += t.c * t.i * (t.i - 1) * pw(x[0], t.i - 2) * pw(x[1], t.j);
      if (t.j > 1) H(1, 1) += t.c * t.j * (t.j - 1) * pw(x[0], t.i) * pw(x[1], t.j - 2);
      if (t.i > 0 && t.j > 0)
        H(0, 1) += t.c * t.i * t.j * pw(x[0], t.i - 1) * pw(x[1], t.j - 1);
    }
    H(1, 0) = H(0, 1);
    return H;
  };
  P.window = window;
  P.name = name;
  return P;
}

Potential make_builtin(const std::string& name) {
  if (name == "double_well")
    return make_poly1d({0.25, 0, -0.5, 0, 0.25}, -2.8, 2.8, name);
  if (name == "tilted_double_well")
    return make_poly1d({0.25, 0.1, -0.5, 0, 0.25}, -2.8, 2.8, name);
  if (name == "wide_double_well")
    return make_poly1d({0.8, 0.02, -0.4, 0, 0.05}, -4.2, 4.2, name);
  if (name == "triple_well")
    return make_poly1d({0, 0.04, 12.0 / 11.0, 0, -7.5 / 11.0, 0, 1.0 / 11.0}, -3.8, 3.8, name);
  if (name == "double_well_2d" || name == "tilted_double_well_2d") {
    std::vector<Monomial2d> terms = {
        {4, 0, 0.25}, {2, 0, -0.5}, {0, 0, 0.25}, {0, 2, 0.5}};
    if (name == "tilted_double_well_2d") terms.push_back({1, 0, 0.1});
    Window w;
    w.lo = Vec::Constant(2, -2.0);
    w.hi = Vec::Constant(2, 2.0);
    w.lo[1] = -1.6;
    w.hi[1] = 1.6;
    return make_poly2d(terms, w, name);
  }
  throw ConfigError("unknown builtin potential '" + name + "'");
}

Potential make_lifted_2W(const Potential& V, double vmax) {
  if (V.dim != 1) throw ConfigError("make_lifted_2W requires d = 1");
  // stored as 2W = V(x) + v^2/2, so the sublevel machinery (which works with
  // eval/2 throughout) sees W itself
  Potential P;
  P.dim = 2;
  P.eval = [V](const Vec& y) {
    return V.eval1(y[0]) + y[1] * y[1] / 2;
  };
  P.grad = [V](const Vec& y) {
    Vec g(2);
    g[0] = V.grad1(y[0]);
    g[1] = y[1];
    return g;
  };
  P.hess = [V](const Vec& y) {
    Mat H = Mat::Zero(2, 2);
    H(0, 0) = V.hess1(y[0]);
    H(1, 1) = 1.0;
    return H;
  };
  P.window.lo = Vec(2);
  P.window.hi = Vec(2);
  P.window.lo << V.window.lo[0], -vmax;
  P.window.hi << V.window.hi[0], vmax;
  P.name = V.name + "_lifted_W";
  return P;
}

PotentialCheck validate_potential(const Potential& P, int nsample, unsigned seed,
                                  double grad_floor) {
  PotentialCheck r;
  std::mt19937 rng(seed);
  const int d = P.dim;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto draw = [&] {
    Vec x(d);
    for (int k = 0; k < d; ++k)
      x[k] = P.window.lo[k] + unit(rng) * P.window.extent(k);
    return x;
  };
  double scale = 0;
  for (int i = 0; i < nsample; ++i) {
    Vec x = draw();
    scale = std::max(scale, std::abs(P.eval(x)));
    Vec g = P.grad(x);
    Mat H = P.hess(x);
    r.max_hess_asym = std::max(r.max_hess_asym, (H - H.transpose()).cwiseAbs().maxCoeff());
    for (int k = 0; k < d; ++k) {
      const double dl = 1e-5 * std::max(1.0, std::abs(x[k]));
      Vec xp = x, xm = x;
      xp[k] += dl;
      xm[k] -= dl;
      double gfd = (P.eval(xp) - P.eval(xm)) / (2 * dl);
      double rel = std::abs(g[k] - gfd) / std::max(1.0, std::abs(g[k]));
      r.max_grad_fd_rel = std::max(r.max_grad_fd_rel, rel);
      Vec hfd = (P.grad(xp) - P.grad(xm)) / (2 * dl);
      r.max_hess_fd_abs =
          std::max(r.max_hess_fd_abs, (H.col(k) - hfd).cwiseAbs().maxCoeff() /
                                          std::max(1.0, H.cwiseAbs().maxCoeff()));
    }
  }
  // boundary confinement proxy: sample each face
  r.min_boundary_grad = std::numeric_limits<double>::infinity();
  const int nface = 32;
  for (int k = 0; k < d; ++k) {
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i < nface; ++i) {
        Vec x = draw();
        x[k] = side ? P.window.hi[k] : P.window.lo[k];
        r.min_boundary_grad = std::min(r.min_boundary_grad, P.grad(x).norm());
      }
    }
  }
  r.ok = r.max_grad_fd_rel < 1e-6 && r.max_hess_fd_abs < 1e-5 &&
         r.max_hess_asym < 1e-12 && r.min_boundary_grad >= grad_floor;
  return r;
}

}  // namespace metaboltz
