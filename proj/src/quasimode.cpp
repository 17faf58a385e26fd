#include "metaboltz/quasimode.hpp"

#include <cmath>
#include <numbers>

#include "metaboltz/errors.hpp"

namespace metaboltz {

namespace {

// C^2 polynomial smoothstep on [0, 1]
double smoothstep(double t) {
  t = std::clamp(t, 0.0, 1.0);
  return t * t * t * (10 + t * (-15 + 6 * t));
}

// even cutoff: 1 on [-g/2, g/2], 0 outside [-g, g]
double zeta(double t, double g) { return 1.0 - smoothstep((std::abs(t) - g / 2) / (g / 2)); }

// scaled Hermite functions psi_n(v), n = 0..nH-1, column per level
Mat hermite_functions(const Vec& vs, int nH, double h) {
  const int nv = static_cast<int>(vs.size());
  Mat phi(nv, nH);
  const double s2h = std::sqrt(2 * h);
  for (int i = 0; i < nv; ++i) {
    const double u = vs[i] / s2h;
    phi(i, 0) = std::pow(std::numbers::pi, -0.25) * std::exp(-u * u / 2);
    if (nH > 1) phi(i, 1) = std::numbers::sqrt2 * u * phi(i, 0);
    for (int n = 1; n + 1 < nH; ++n)
      phi(i, n + 1) =
          (std::numbers::sqrt2 * u * phi(i, n) - std::sqrt(double(n)) * phi(i, n - 1)) /
          std::sqrt(double(n + 1));
  }
  return phi / std::pow(2 * h, 0.25);
}

}  // namespace

double Quasimode::W(double x, double v) const { return P_->eval1(x) / 2 + v * v / 4; }

double Quasimode::theta(double x, double v) const {
  // product of the per-saddle sigmoid profiles (each saturates to 1/0)
  double t = 1.0;
  for (const auto& c : cuts) {
    const double ell = c.nu1 * (x - c.location[0]) + c.nu2 * v;
    const double a = std::abs(ell);
    double integ;
    if (a >= gamma) {
      integ = A_h;
    } else {
      // tabulated cumulative of zeta e^{-s^2/2h}
      const double pos = a / gamma * (zeta_s_.size() - 1);
      const size_t i0 = std::min(zeta_s_.size() - 2, static_cast<size_t>(pos));
      const double w = pos - i0;
      integ = zeta_int_[i0] * (1 - w) + zeta_int_[i0 + 1] * w;
    }
    t *= 0.5 * (1.0 + (ell < 0 ? -1.0 : 1.0) * integ / A_h);
  }
  return t;
}

double Quasimode::chi(double x, double v) const {
  double c = 1.0 - smoothstep((W(x, v) - sigma - eps_tilde) / eps_tilde);
  if (box_edge > 0) {
    c *= smoothstep((x - box_lo) / box_edge + 1.0);
    c *= smoothstep((box_hi - x) / box_edge + 1.0);
  }
  return c;
}

double Quasimode::value(double x, double v) const {
  return chi(x, v) * theta(x, v) * std::exp(-(W(x, v) - Vm / 2) / h);
}

Mat Quasimode::hermite_coefficients(const Vec& xnodes, int nH, int nv, double vmax) const {
  Vec vs(nv);
  for (int i = 0; i < nv; ++i) vs[i] = -vmax + 2 * vmax * i / (nv - 1);
  const double dv = vs[1] - vs[0];
  Mat psi = hermite_functions(vs, nH, h);
  Mat C(xnodes.size(), nH);
  Vec fcol(nv);
  for (int ix = 0; ix < xnodes.size(); ++ix) {
    for (int iv = 0; iv < nv; ++iv) fcol[iv] = value(xnodes[ix], vs[iv]);
    C.row(ix) = (fcol.transpose() * psi) * dv;
  }
  return C;
}

Vec Quasimode::sample(const AssembledOperator& op) const {
  const int nH = op.nHermite;
  const double vmax = 3.0 + 2 * std::sqrt(std::max(1.0, op.h * nH));
  Mat Cc = hermite_coefficients(op.centers, nH, 1200, vmax);
  Mat Ce = hermite_coefficients(op.edges, nH, 1200, vmax);
  Vec out(op.size());
  for (int i = 0; i < op.nx; ++i)
    for (int n = 0; n < nH; ++n)
      out[i * nH + n] = (n % 2 == 0) ? Cc(i, n) : Ce(i, n);
  out.normalize();
  return out;
}

Quasimode build_quasimode(const Labeling& L, const CollisionModel& model,
                          const Potential& P, int which, double h,
                          const QuasimodeParams& params) {
  const auto& e = L.minima.at(which);
  if (e.rank_k == 1) throw ConfigError("global minimum has no cut quasimode");
  if (P.dim != 1) throw ConfigError("build_quasimode requires d = 1");

  Quasimode q;
  q.P_ = &P;
  q.h = h;
  q.sigma = e.sigma;
  q.Vm = e.minimum.value;
  q.detHessM = e.minimum.hessian.determinant();
  q.S = e.S;
  q.eps_tilde = params.eps_tilde_factor * h;

  const double m = e.minimum.location[0];
  double l0_min = kInf;
  for (const auto& s : e.saddles) {
    SaddleData sd = SaddleData::from(s, model);
    SaddlePrefactor sp = phi_eigenproblem(sd);
    Quasimode::SaddleCut cut;
    cut.location = s.location;
    cut.nu1 = sp.nu[0];
    cut.nu2 = sp.nu[1];
    // sign rule: l0 > 0 one grid step inside E(m)
    const double step = L.grid ? L.grid->spacing(0) : 1e-3;
    const double probe = s.location[0] + (m > s.location[0] ? step : -step);
    if (cut.nu1 * (probe - s.location[0]) < 0) {
      cut.nu1 = -cut.nu1;
      cut.nu2 = -cut.nu2;
    }
    q.cuts.push_back(cut);
    l0_min = std::min(l0_min, std::abs(cut.nu1 * (m - s.location[0])));
  }
  q.l0_at_min = l0_min;
  q.gamma = std::min(params.c_gamma * std::sqrt(h), 0.8 * l0_min);

  // supp chi stays inside (the x-projection of) Omega + B(0, eps): the hull of
  // the sublevel component through the saddles of j(m), with smooth edges that
  // must not re-enter a foreign low-W region
  if (L.grid && L.grid->dim() == 1) {
    const auto& g = *L.grid;
    // hull level: high enough that the box edges carry only exponentially
    // suppressed mass, but below the next separating value so no foreign well
    // is swallowed without a theta cut
    double lvl = e.sigma + 2 * q.eps_tilde;
    for (double sv : L.separating_values)
      if (sv > e.sigma + 2 * L.quantum) lvl = std::min(lvl, sv - 2 * L.quantum);
    auto labels = g.flood(lvl);
    const int comp = labels[g.node_near(e.minimum.location)];
    int ilo = g.nodes(), ihi = -1;
    for (int nidx = 0; nidx < g.nodes(); ++nidx)
      if (labels[nidx] == comp) {
        ilo = std::min(ilo, nidx);
        ihi = std::max(ihi, nidx);
      }
    q.box_lo = g.coords(ilo)[0];
    q.box_hi = g.coords(ihi)[0];
    // available margin before the level-set re-enters another component
    auto margin = [&](int start, int dir) {
      for (int nidx = start + dir; nidx >= 0 && nidx < g.nodes(); nidx += dir)
        if (labels[nidx] >= 0 && labels[nidx] != comp)
          return std::abs(g.coords(nidx)[0] - g.coords(start)[0]);
      return kInf;
    };
    const double avail = std::min(margin(ilo, -1), margin(ihi, +1));
    q.box_edge = std::min({0.4 * avail, 0.2 * (q.box_hi - q.box_lo),
                           0.25 * std::sqrt(h) + 4 * g.spacing(0)});
  }

  // collar overlap: the |l0| <= 2 gamma slabs of distinct cuts must be disjoint
  for (size_t a = 0; a < q.cuts.size(); ++a)
    for (size_t b = a + 1; b < q.cuts.size(); ++b) {
      const auto&ca = q.cuts[a];
      const auto& cb = q.cuts[b];
      const double la_at_b = ca.nu1 * (cb.location[0] - ca.location[0]);
      const double lb_at_a = cb.nu1 * (ca.location[0] - cb.location[0]);
      if (std::abs(la_at_b) < 2 * q.gamma || std::abs(lb_at_a) < 2 * q.gamma)
        throw CollarOverlap("saddle cuts at x = " + std::to_string(ca.location[0]) +
                            " and x = " + std::to_string(cb.location[0]) +
                            " overlap; reduce gamma");
    }

  // tabulate the profile integral
  const int npts = 4001;
  q.zeta_s_.resize(npts);
  q.zeta_int_.resize(npts);
  double acc = 0;
  double prev = zeta(0, q.gamma);
  q.zeta_int_[0] = 0;
  for (int i = 1; i < npts; ++i) {
    const double s = q.gamma * i / (npts - 1);
    const double cur = zeta(s, q.gamma) * std::exp(-s * s / (2 * h));
    acc += 0.5 * (prev + cur) * (q.gamma / (npts - 1));
    q.zeta_int_[i] = acc;
    q.zeta_s_[i] = s;
    prev = cur;
  }
  q.A_h = acc;
  return q;
}

RayleighResult rayleigh_quotient(const Quasimode& q, const CollisionModel& model,
                                 const AssembledOperator& op,
                                 const QuasimodeParams& params) {
  RayleighResult r;
  const double h = q.h;
  // continuum route: independent x-grid denser than the assembly grid
  const int nxq = std::max(400, static_cast<int>(std::ceil(
                               (op.xmax - op.xmin) / (std::sqrt(h) / params.quad_per_sqrt_h))));
  if (nxq < 12) throw GridTooCoarse("x-quadrature grid too coarse");
  Vec xq(nxq);
  for (int i = 0; i < nxq; ++i)
    xq[i] = op.xmin + (op.xmax - op.xmin) * (i + 0.5) / nxq;
  const double dxq = (op.xmax - op.xmin) / nxq;
  const int nH = params.n_hermite;
  const double vmax = params.vmax > 0 ? params.vmax
                                      : 3.0 + 2 * std::sqrt(std::max(1.0, h * nH));
  Mat C = q.hermite_coefficients(xq, nH, params.nv, vmax);
  Vec rho = q_hermite_diagonal(model, h, nH - 1);
  double qff = 0, nrm = 0;
  for (int i = 0; i < nxq; ++i)
    for (int n = 0; n < nH; ++n) {
      const double c2 = C(i, n) * C(i, n);
      qff += rho[n] * c2;
      nrm += c2;
    }
  qff *= dxq;
  nrm *= dxq;
  r.value_quadrature = qff / nrm;
  r.norm_c0 = nrm * std::sqrt(q.detHessM) / (2 * std::numbers::pi * h);

  // discrete route on the assembled operator
  Vec c = q.sample(op);
  Vec Ac = op.apply(c);
  r.value_discrete = c.dot(Ac);
  // X0 part: A minus the collision diagonal
  Vec rho_op = q_hermite_diagonal(model, h, op.nHermite - 1);
  double coll = 0;
  for (int i = 0; i < op.nx; ++i)
    for (int n = 0; n < op.nHermite; ++n)
      coll += rho_op[n] * c[i * op.nHermite + n] * c[i * op.nHermite + n];
  r.x0_term = r.value_discrete - coll;
  return r;
}

ResidualTriple quasimode_residual(const Quasimode& q, const AssembledOperator& op) {
  ResidualTriple t;
  Vec c = q.sample(op);
  Vec Ac = op.apply(c);
  Vec Atc = op.apply_transpose(c);
  t.pff = c.dot(Ac);
  t.pf2 = Ac.squaredNorm();
  t.pstarf2 = Atc.squaredNorm();
  return t;
}

std::vector<LaplaceRow> laplace_check(const std::function<double(double, double)>& phi,
                                      const std::function<double(double, double)>& amp,
                                      const Vec& x0, const Mat& hess,
                                      const std::vector<double>& h_list, double box_radius,
                                      int npts) {
  std::vector<LaplaceRow> rows;
  const double phi0 = phi(x0[0], x0[1]);
  const double a0 = amp(x0[0], x0[1]);
  const double dets = std::sqrt(hess.determinant());
  for (double h : h_list) {
    double integral = 0;
    const double dx = 2 * box_radius / npts;
    for (int i = 0; i < npts; ++i)
      for (int j = 0; j < npts; ++j) {
        const double x = x0[0] - box_radius + (i + 0.5) * dx;
        const double y = x0[1] - box_radius + (j + 0.5) * dx;
        integral += amp(x, y) * std::exp(-(phi(x, y) - phi0) / h);
      }
    integral *= dx * dx;
    LaplaceRow r;
    r.h = h;
    const double leading = integral * dets / (2 * std::numbers::pi * h);
    r.ratio = a0 != 0 ? leading / a0 : leading;
    r.err_over_h = (leading - a0) / h;
    rows.push_back(r);
  }
  return rows;
}

}  // namespace metaboltz
