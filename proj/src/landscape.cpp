#include "metaboltz/landscape.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "metaboltz/errors.hpp"

namespace metaboltz {

namespace {

std::string pt_str(const Vec& x) {
  std::ostringstream os;
  os << "(";
  for (int k = 0; k < x.size(); ++k) os << (k ? ", " : "") << x[k];
  os << ")";
  return os.str();
}

CriticalPoint classify(const Potential& P, const Vec& x) {
  CriticalPoint c;
  c.location = x;
  c.value = P.eval(x);
  c.hessian = P.hess(x);
  Eigen::SelfAdjointEigenSolver<Mat> es(c.hessian);
  c.hessEigen = es.eigenvalues();
  c.index = 0;
  for (int k = 0; k < c.hessEigen.size(); ++k) {
    if (std::abs(c.hessEigen[k]) < 1e-8)
      throw DegenerateCritical("Hessian eigenvalue " + std::to_string(c.hessEigen[k]) +
                               " within 1e-8 of zero at " + pt_str(x));
    if (c.hessEigen[k] < 0) ++c.index;
  }
  return c;
}

}  // namespace

std::vector<CriticalPoint> find_critical_points(const Potential& P, int seeds_per_axis) {
  const int d = P.dim;
  const double diag = (P.window.hi - P.window.lo).norm();
  double grad_scale = 1.0;

  std::vector<Vec> seeds;
  if (d == 1) {
    for (int i = 0; i < seeds_per_axis; ++i) {
      const double t = (i + 0.5) / seeds_per_axis;
      seeds.push_back(Vec::Constant(1, P.window.lo[0] + t * P.window.extent(0)));
    }
  } else {
    for (int i = 0; i < seeds_per_axis; ++i)
      for (int j = 0; j < seeds_per_axis; ++j) {
        Vec x(2);
        x[0] = P.window.lo[0] + (i + 0.5) / seeds_per_axis * P.window.extent(0);
        x[1] = P.window.lo[1] + (j + 0.5) / seeds_per_axis * P.window.extent(1);
        seeds.push_back(x);
      }
  }
  for (const Vec& s : seeds) grad_scale = std::max(grad_scale, P.grad(s).norm());

  std::vector<Vec> found;
  for (Vec x : seeds) {
    bool converged = false;
    for (int pass = 0; pass < 2 && !converged; ++pass) {
      if (pass == 1) {
        // gradient-descent fallback to enter a basin, then retry Newton
        for (int it = 0; it < 200; ++it) {
          Vec g = P.grad(x);
          if (g.norm() < 1e-3 * grad_scale) break;
          x -= (0.02 * diag / std::max(1.0, g.norm())) * g;
          if (!P.window.contains(x)) break;
        }
        if (!P.window.contains(x)) break;
      }
      Vec y = x;
      for (int it = 0; it < 80; ++it) {
        Vec g = P.grad(y);
        if (g.norm() <= 1e-12 * grad_scale) break;
        Mat H = P.hess(y);
        Vec step = H.fullPivLu().solve(g);
        if (!step.allFinite() || step.norm() > 0.5 * diag) break;
        y -= step;
        if (!P.window.contains(y, -0.05 * diag)) break;
      }
      if (P.window.contains(y) && P.grad(y).norm() <= 1e-9 * grad_scale) {
        x = y;
        converged = true;
      }
    }
    if (!converged) continue;
    bool dup = false;
    for (const Vec& f : found)
      if ((f - x).norm() < 1e-6 * diag) {
        dup = true;
        break;
      }
    if (!dup) found.push_back(x);
  }

  std::vector<CriticalPoint> out;
  out.reserve(found.size());
  for (const Vec& x : found) out.push_back(classify(P, x));
  std::sort(out.begin(), out.end(),
            [](const CriticalPoint& a, const CriticalPoint& b) { return a.value < b.value; });

  int nmin = 0;
  for (const auto& c : out) nmin += (c.index == 0);
  if (nmin < 2)
    throw NoMinima("found " + std::to_string(nmin) + " local minima; need at least 2");
  return out;
}

namespace {

// Walks from a saddle along +-(unstable eigenvector) until V/2 drops below the
// threshold; returns the grid node reached, or -1.
int descent_node(const Potential& P, const SublevelGrid& g, const CriticalPoint& s,
                 double threshold, double clearance, int sign) {
  Eigen::SelfAdjointEigenSolver<Mat> es(s.hessian);
  Vec dir = es.eigenvectors().col(0);  // most negative eigenvalue first
  dir *= sign;
  const double span = (P.window.hi - P.window.lo).norm();
  const double step = 0.75 * g.spacing(0);
  const int max_it = std::max(400, static_cast<int>(0.4 * span / step));
  Vec x = s.location;
  for (int it = 0; it < max_it; ++it) {
    x += step * dir;
    if (!P.window.contains(x)) return -1;
    if (P.eval(x) / 2 < threshold - clearance) return g.node_near(x);
    // steer along -grad once we are away from the saddle
    if (it >= 3) {
      Vec gr = P.grad(x);
      if (gr.norm() > 1e-14) dir = -gr / gr.norm();
    }
  }
  return -1;
}

}  // namespace

SaddleAnalysis separating_saddles(const Potential& P,
                                  const std::vector<CriticalPoint>& critical,
                                  int grid_resolution) {
  SaddleAnalysis res;
  res.grid = std::make_shared<SublevelGrid>(P, grid_resolution);

  double vscale = 1.0, cap = -kInf, vmin = kInf;
  for (const auto& c : critical) {
    vscale = std::max(vscale, std::abs(c.value));
    vmin = std::min(vmin, c.value / 2);
    if (c.index == 1) cap = std::max(cap, c.value / 2);
  }
  if (cap == -kInf) cap = vscale;
  cap += 0.05 * (cap - vmin) + 1e-12;  // include the saddle-straddling edges
  const double q = res.grid->energy_quantum_below(cap);
  res.quantum = q;
  res.delta = 2 * q;
  const double tie_tol = 1e-9 * vscale;

  for (const auto& s : critical) {
    if (s.index != 1) continue;
    const double thr = s.value / 2 - res.delta;
    auto labels = res.grid->flood(thr);
    const int a = descent_node(P, *res.grid, s, thr, q, +1);
    const int b = descent_node(P, *res.grid, s, thr, q, -1);
    if (a < 0 || b < 0 || labels[a] < 0 || labels[b] < 0)
      throw ResolutionTooCoarse("descent from saddle at " + pt_str(s.location) +
                                " did not reach the sublevel set");
    if (labels[a] != labels[b]) res.separating_saddles.push_back(s);
  }

  std::vector<double> vals;
  for (const auto& s : res.separating_saddles) vals.push_back(s.value / 2);
  std::sort(vals.begin(), vals.end(), std::greater<>());
  for (size_t i = 0; i + 1 < vals.size(); ++i) {
    const double gap = vals[i] - vals[i + 1];
    if (gap <= tie_tol)
      throw TieBreak("two separating saddles share the value " + std::to_string(vals[i]));
    if (gap < 4 * q)
      throw ResolutionTooCoarse("separating values " + std::to_string(vals[i]) + " and " +
                                std::to_string(vals[i + 1]) + " differ by less than 4 grid quanta (" +
                                std::to_string(4 * q) + ")");
  }
  vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
  res.separating_values = vals;
  return res;
}

Labeling build_labeling(const Potential& P, const std::vector<CriticalPoint>& critical,
                        const SaddleAnalysis& sa) {
  Labeling L;
  L.grid = sa.grid;
  L.quantum = sa.quantum;
  L.delta = sa.delta;
  L.separating_values = sa.separating_values;

  std::vector<CriticalPoint> minima;
  for (const auto& c : critical)
    if (c.index == 0) minima.push_back(c);

  double vscale = 1.0;
  for (const auto& c : critical) vscale = std::max(vscale, std::abs(c.value));
  const double tie_tol = 1e-9 * vscale;

  const int nmin = static_cast<int>(minima.size());
  std::vector<int> rank(nmin, 0), sublevel_j(nmin, 0);
  std::vector<double> sigma_of(nmin, kInf);

  // level 1: the whole space; its global minimum gets rank 1
  {
    int best = 0;
    for (int i = 1; i < nmin; ++i)
      if (minima[i].value < minima[best].value) best = i;
    for (int i = 0; i < nmin; ++i) {
      if (i == best) continue;
      if (std::abs(minima[i].value - minima[best].value) <= tie_tol)
        throw HypothesisJVideViolated(
            "two global minima of equal value " + std::to_string(minima[best].value) +
            " in the top-level component (minima at " + pt_str(minima[best].location) +
            " and " + pt_str(minima[i].location) + ")");
    }
    rank[best] = 1;
    sublevel_j[best] = 1;
  }

  // levels 2..N downward
  for (size_t lvl = 0; lvl < sa.separating_values.size(); ++lvl) {
    const int k = static_cast<int>(lvl) + 2;
    const double thr = sa.separating_values[lvl] - sa.delta;
    auto labels = sa.grid->flood(thr);
    std::map<int, std::vector<int>> comp_minima;  // component -> minima inside
    for (int i = 0; i < nmin; ++i) {
      const int node = sa.grid->node_near(minima[i].location);
      if (labels[node] >= 0) comp_minima[labels[node]].push_back(i);
    }
    int jpos = 0;
    for (auto& [comp, members] : comp_minima) {
      bool has_labeled = false;
      for (int i : members) has_labeled |= (rank[i] > 0);
      if (has_labeled) continue;
      int best = members.front();
      for (int i : members)
        if (minima[i].value < minima[best].value) best = i;
      for (int i : members) {
        if (i == best) continue;
        if (std::abs(minima[i].value - minima[best].value) <= tie_tol)
          throw HypothesisJVideViolated("component at level " + std::to_string(k) +
                                        " has two global minima of equal value");
      }
      rank[best] = k;
      sublevel_j[best] = ++jpos;
      sigma_of[best] = sa.separating_values[lvl];
    }
  }

  for (int i = 0; i < nmin; ++i)
    if (rank[i] == 0)
      throw ResolutionTooCoarse("minimum at " + pt_str(minima[i].location) +
                                " was never isolated by the separating levels");

  // fill entries: region (component at sigma - delta), saddles on its boundary
  for (int i = 0; i < nmin; ++i) {
    Labeling::Entry e;
    e.minimum = minima[i];
    e.rank_k = rank[i];
    e.j = sublevel_j[i];
    e.sigma = sigma_of[i];
    e.S = (rank[i] == 1) ? kInf : sigma_of[i] - minima[i].value / 2;
    if (rank[i] != 1) {
      const double thr = e.sigma - sa.delta;
      auto labels = sa.grid->flood(thr);
      const int comp = labels[sa.grid->node_near(minima[i].location)];
      double lo = kInf, hi = -kInf;
      for (int node = 0; node < sa.grid->nodes(); ++node) {
        if (labels[node] != comp) continue;
        e.region_nodes.push_back(node);
        const double x0 = sa.grid->coords(node)[0];
        lo = std::min(lo, x0);
        hi = std::max(hi, x0);
      }
      e.region_lo = lo;
      e.region_hi = hi;
      for (const auto& s : sa.separating_saddles) {
        if (std::abs(s.value / 2 - e.sigma) > tie_tol) continue;
        const int a = descent_node(P, *sa.grid, s, thr, sa.quantum, +1);
        const int b = descent_node(P, *sa.grid, s, thr, sa.quantum, -1);
        if ((a >= 0 && labels[a] == comp) || (b >= 0 && labels[b] == comp))
          e.saddles.push_back(s);
      }
    } else {
      e.region_lo = P.window.lo[0];
      e.region_hi = P.window.hi[0];
    }
    L.minima.push_back(std::move(e));
  }

  // Hypothesis 4 (b): j-sets pairwise disjoint
  const double dedup = 1e-6 * (P.window.hi - P.window.lo).norm();
  for (size_t a = 0; a < L.minima.size(); ++a)
    for (size_t b = a + 1; b < L.minima.size(); ++b)
      for (const auto& sa_ : L.minima[a].saddles)
        for (const auto& sb : L.minima[b].saddles)
          if ((sa_.location - sb.location).norm() < dedup)
            throw HypothesisJVideViolated(
                "saddle at " + pt_str(sa_.location) + " belongs to j(" +
                pt_str(L.minima[a].minimum.location) + ") and j(" +
                pt_str(L.minima[b].minimum.location) + ")");

  // global minimum first, then decreasing S, ties by value
  std::sort(L.minima.begin(), L.minima.end(), [](const auto& a, const auto& b) {
    if (a.S != b.S) return a.S > b.S;
    return a.minimum.value < b.minimum.value;
  });
  return L;
}

LiftReport lift_check_W(const Potential& P, const Labeling& L, int grid_resolution) {
  if (P.dim != 1) throw ConfigError("lift_check_W requires d = 1");
  LiftReport rep;
  rep.v_values = L.separating_values;

  double vmin = kInf;
  for (const auto& e : L.minima) vmin = std::min(vmin, e.minimum.value);
  double smax = L.separating_values.empty() ? 1.0 : L.separating_values.front();
  const double vmax = 2 * std::sqrt(std::max(1e-6, smax - vmin / 2)) * 1.25 + 0.5;

  Potential Wp = make_lifted_2W(P, vmax);
  // shrink the x-extent to the sublevel that carries the connectivity at the
  // candidate levels; steep outer walls would otherwise dominate the quantum
  {
    const double cap = 2 * smax + 0.3 * (2 * smax - vmin) + 1e-9;
    double xlo = kInf, xhi = -kInf;
    const int nscan = 4001;
    for (int i = 0; i < nscan; ++i) {
      const double x =
          P.window.lo[0] + (P.window.hi[0] - P.window.lo[0]) * i / (nscan - 1);
      if (P.eval1(x) <= cap) {
        xlo = std::min(xlo, x);
        xhi = std::max(xhi, x);
      }
    }
    const double pad = 0.08 * (xhi - xlo);
    Wp.window.lo[0] = std::max(P.window.lo[0], xlo - pad);
    Wp.window.hi[0] = std::min(P.window.hi[0], xhi + pad);
  }
  auto crit = find_critical_points(Wp, 40);
  auto sa = separating_saddles(Wp, crit, grid_resolution);
  rep.w_values = sa.separating_values;

  for (const auto& s : sa.separating_saddles)
    rep.max_saddle_v_offset = std::max(rep.max_saddle_v_offset, std::abs(s.location[1]));

  const double tol = L.delta + sa.delta;
  if (rep.w_values.size() != rep.v_values.size()) {
    throw MismatchDetected("W lift found " + std::to_string(rep.w_values.size()) +
                           " separating values, V/2 has " +
                           std::to_string(rep.v_values.size()));
  }
  for (size_t i = 0; i < rep.v_values.size(); ++i)
    rep.max_value_diff = std::max(rep.max_value_diff,
                                  std::abs(rep.v_values[i] - rep.w_values[i]));
  if (rep.max_value_diff > tol)
    throw MismatchDetected("separating values of W and V/2 differ by " +
                           std::to_string(rep.max_value_diff) + " > " + std::to_string(tol));
  rep.ok = rep.max_saddle_v_offset <= 2 * sa.grid->spacing(1);
  if (!rep.ok)
    throw MismatchDetected("W-saddle not located at v = 0 (offset " +
                           std::to_string(rep.max_saddle_v_offset) + ")");
  return rep;
}

}  // namespace metaboltz
