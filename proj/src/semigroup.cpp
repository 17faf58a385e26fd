#include "metaboltz/semigroup.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "metaboltz/errors.hpp"

namespace metaboltz {

namespace {

// real basis from complex eigenvectors: one column per real eigenvalue,
// (Re, Im) pair for each complex-conjugate pair (listed once)
Mat real_basis(const SpectralResult& sr) {
  const int n = static_cast<int>(sr.vectors.rows());
  std::vector<Vec> cols;
  for (size_t i = 0; i < sr.smallEigs.size(); ++i) {
    const Cplx lam = sr.smallEigs[i];
    if (std::abs(lam.imag()) <= 1e-12 * std::max(1.0, std::abs(lam))) {
      Vec re = sr.vectors.col(i).real();
      if (re.norm() < 0.5) re = sr.vectors.col(i).imag();  // phase happened to be i
      cols.push_back(re.normalized());
    } else if (lam.imag() > 0) {
      cols.push_back(sr.vectors.col(i).real());
      cols.push_back(sr.vectors.col(i).imag());
    }
  }
  Mat B(n, cols.size());
  for (size_t j = 0; j < cols.size(); ++j) B.col(j) = cols[j];
  return B;
}

}  // namespace

SpectralProjectors::SpectralProjectors(const SpectralResult& right,
                                       const SpectralResult& left, double scale_break) {
  V_ = real_basis(right);
  W_ = real_basis(left);
  if (V_.cols() != W_.cols())
    throw SolverFailure("left/right eigenbasis size mismatch");
  // magnitude-scale clustering of |lambda| (ascending): prefix sizes
  const auto& ev = right.smallEigs;
  int count = 1;
  for (size_t i = 1; i < ev.size(); ++i) {
    const double prev = std::max(std::abs(ev[i - 1]), 1e-300);
    if (std::abs(ev[i]) / prev > scale_break) cluster_sizes_.push_back(count);
    ++count;
  }
  cluster_sizes_.push_back(count);
}

Vec SpectralProjectors::apply(int k, const Vec& u) const {
  const int m = cluster_sizes_.at(k);
  // m counts eigenvalues; complex pairs contribute two basis columns but are
  // grouped inside one scale cluster, so column prefix == eigenvalue prefix here
  Mat Vk = V_.leftCols(m);
  Mat Wk = W_.leftCols(m);
  Mat G = Wk.transpose() * Vk;
  return Vk * G.fullPivLu().solve(Wk.transpose() * u);
}

EvolutionRun evolve(const AssembledOperator& op, const Vec& u0,
                    const SpectralProjectors& proj, const EvolvePolicy& policy) {
  EvolutionRun run;
  run.h = op.h;
  const double h = op.h;
  Vec u = u0;
  const double n0 = u0.norm();

  auto snapshot = [&](double t) {
    Snapshot s;
    s.t = t;
    s.norm = u.norm();
    s.dist_kernel = (u - proj.apply(0, u)).norm() / n0;
    for (int k = 0; k < proj.clusters(); ++k)
      s.dist_cluster.push_back((u - proj.apply(k, u0)).norm() / n0);
    run.snaps.push_back(std::move(s));
  };

  snapshot(0.0);
  double t = 0;

  // constant step within each decade keeps the factorization count at one or
  // two per decade; the cache is dropped on each step-size change
  auto step_with = [&](double dt, int reps) {
    const double tau = dt / h;
    for (int r = 0; r < reps; ++r) {
      Vec unew;
      if (policy.crank_nicolson) {
        // (I + tau A/2) w = (I - tau A/2) u
        Vec rhs = u - (tau / 2) * op.apply(u);
        unew = op.solve_shifted_real(-2.0 / tau, (2.0 / tau) * rhs);
      } else {
        unew = op.solve_shifted_real(-1.0 / tau, (1.0 / tau) * u);
      }
      if (!unew.allFinite()) throw SolverFailure("implicit step produced non-finite state");
      u = unew;
      t += dt;
      snapshot(t);
    }
  };

  // transient: one step to t = h
  op.drop_shift_cache();
  step_with(std::min(h, policy.dt_cap), 1);
  while (t < policy.t_end * (1 - 1e-12)) {
    const double decade_end = std::min(10.0 * t, policy.t_end);
    double dt = (decade_end - t) / policy.steps_per_decade;
    int reps = policy.steps_per_decade;
    if (dt > policy.dt_cap) {
      reps = static_cast<int>(std::ceil((decade_end - t) / policy.dt_cap));
      dt = (decade_end - t) / reps;
    }
    op.drop_shift_cache();
    step_with(dt, reps);
  }
  run.u_final = u;
  return run;
}

DecayFit decay_rate(const EvolutionRun& run, double fit_floor) {
  // fit over the final stretch where dist_kernel decays cleanly: take snapshots
  // with dist in [max(fit_floor, 1e-6 * peak), 0.2 * peak]
  DecayFit fit;
  double peak = 0, floor = kInf;
  for (const auto& s : run.snaps) {
    peak = std::max(peak, s.dist_kernel);
    if (s.t > 0) floor = std::min(floor, s.dist_kernel);
  }
  const double hi = 0.2 * peak;
  // stay above the numerical floor (projector residual scale) of the curve
  const double lo = std::max({fit_floor, 1e-6 * peak, 3 * floor});
  std::vector<double> ts, ys;
  for (const auto& s : run.snaps) {
    if (s.t <= 0) continue;
    if (s.dist_kernel < lo || s.dist_kernel > hi) continue;
    ts.push_back(s.t);
    ys.push_back(std::log(s.dist_kernel));
  }
  fit.points = static_cast<int>(ts.size());
  if (fit.points < 4 || ts.back() / ts.front() < 3.0)
    throw InsufficientWindow("decay fit window has " + std::to_string(fit.points) +
                             " snapshots spanning x" +
                             std::to_string(ts.empty() ? 0.0 : ts.back() / ts.front()));
  // least squares y = a - rate * t
  double st = 0, sy = 0, stt = 0, sty = 0;
  const double n = fit.points;
  for (int i = 0; i < fit.points; ++i) {
    st += ts[i];
    sy += ys[i];
    stt += ts[i] * ts[i];
    sty += ts[i] * ys[i];
  }
  const double denom = n * stt - st * st;
  fit.rate = -(n * sty - st * sy) / denom;
  fit.rate_times_h = fit.rate * run.h;
  const double a = (sy - (-fit.rate) * st) / n;
  for (int i = 0; i < fit.points; ++i) {
    const double r = ys[i] - (a - fit.rate * ts[i]);
    fit.residual += r * r;
  }
  fit.residual = std::sqrt(fit.residual / n);
  return fit;
}

PlateauReport plateau_report(const EvolutionRun& run, double threshold) {
  PlateauReport rep;
  if (run.snaps.empty()) throw NoPlateauDetected("empty run");
  const int K = static_cast<int>(run.snaps.front().dist_cluster.size());
  for (int k = 0; k < K; ++k) {
    double best_begin = 0, best_end = 0;
    double cur_begin = -1;
    for (const auto& s : run.snaps) {
      if (s.t <= 0) continue;
      const bool below = s.dist_cluster[k] < threshold;
      if (below && cur_begin < 0) cur_begin = s.t;
      if (!below && cur_begin > 0) {
        if (s.t / cur_begin > best_end / std::max(best_begin, 1e-300)) {
          best_begin = cur_begin;
          best_end = s.t;
        }
        cur_begin = -1;
      }
    }
    if (cur_begin > 0) {
      const double tend = run.snaps.back().t;
      if (tend / cur_begin > best_end / std::max(best_begin, 1e-300)) {
        best_begin = cur_begin;
        best_end = tend;
      }
    }
    if (best_begin > 0 && best_end / best_begin >= 10.0) {
      Plateau p;
      p.cluster = k;
      p.t_begin = best_begin;
      p.t_end = best_end;
      p.decades = std::log10(best_end / best_begin);
      rep.plateaus.push_back(p);
    }
  }
  if (rep.plateaus.empty()) throw NoPlateauDetected("no cluster stayed below threshold");
  if (rep.plateaus.size() >= 2) {
    // consecutive onsets, slowest plateau first in cluster order
    std::sort(rep.plateaus.begin(), rep.plateaus.end(),
              [](const Plateau& a, const Plateau& b) { return a.t_begin > b.t_begin; });
    rep.onset_ratio = rep.plateaus[0].t_begin / rep.plateaus[1].t_begin;
  }
  return rep;
}

}  // namespace metaboltz
