#include "metaboltz/gridconn.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace metaboltz {

SublevelGrid::SublevelGrid(const Potential& P, int resolution) {
  dim_ = P.dim;
  lo_ = P.window.lo;
  hi_ = P.window.hi;
  for (int k = 0; k < dim_; ++k) {
    n_[k] = resolution;
    dx_[k] = (hi_[k] - lo_[k]) / (resolution - 1);
  }
  const int total = dim_ == 1 ? n_[0] : n_[0] * n_[1];
  vals_.resize(total);
  Vec x(dim_);
  for (int i = 0; i < n_[0]; ++i) {
    x[0] = lo_[0] + i * dx_[0];
    if (dim_ == 1) {
      vals_[i] = P.eval(x) / 2;
    } else {
      for (int j = 0; j < n_[1]; ++j) {
        x[1] = lo_[1] + j * dx_[1];
        vals_[i * n_[1] + j] = P.eval(x) / 2;
      }
    }
  }
  quantum_ = 0;
  if (dim_ == 1) {
    for (int i = 0; i + 1 < n_[0]; ++i)
      quantum_ = std::max(quantum_, std::abs(vals_[i + 1] - vals_[i]));
  } else {
    for (int i = 0; i < n_[0]; ++i)
      for (int j = 0; j < n_[1]; ++j) {
        const int a = i * n_[1] + j;
        if (i + 1 < n_[0])
          quantum_ = std::max(quantum_, std::abs(vals_[a + n_[1]] - vals_[a]));
        if (j + 1 < n_[1])
          quantum_ = std::max(quantum_, std::abs(vals_[a + 1] - vals_[a]));
      }
  }
}

double SublevelGrid::energy_quantum_below(double level) const {
  double q = 0;
  auto edge = [&](int a, int b) {
    if (vals_[a] < level && vals_[b] < level)
      q = std::max(q, std::abs(vals_[a] - vals_[b]));
  };
  if (dim_ == 1) {
    for (int i = 0; i + 1 < n_[0]; ++i) edge(i, i + 1);
  } else {
    for (int i = 0; i < n_[0]; ++i)
      for (int j = 0; j < n_[1]; ++j) {
        const int a = i * n_[1] + j;
        if (i + 1 < n_[0]) edge(a, a + n_[1]);
        if (j + 1 < n_[1]) edge(a, a + 1);
      }
  }
  return q > 0 ? q : quantum_;
}

Vec SublevelGrid::coords(int node) const {
  Vec x(dim_);
  if (dim_ == 1) {
    x[0] = lo_[0] + node * dx_[0];
  } else {
    x[0] = lo_[0] + (node / n_[1]) * dx_[0];
    x[1] = lo_[1] + (node % n_[1]) * dx_[1];
  }
  return x;
}

int SublevelGrid::node_near(const Vec& x) const {
  auto clampi = [](double t, int n) {
    int i = static_cast<int>(std::lround(t));
    return std::clamp(i, 0, n - 1);
  };
  const int i = clampi((x[0] - lo_[0]) / dx_[0], n_[0]);
  if (dim_ == 1) return i;
  const int j = clampi((x[1] - lo_[1]) / dx_[1], n_[1]);
  return i * n_[1] + j;
}

std::vector<int> SublevelGrid::flood(double threshold) const {
  UnionFind uf(nodes());
  if (dim_ == 1) {
    for (int i = 0; i + 1 < n_[0]; ++i)
      if (vals_[i] < threshold && vals_[i + 1] < threshold) uf.unite(i, i + 1);
  } else {
    for (int i = 0; i < n_[0]; ++i)
      for (int j = 0; j < n_[1]; ++j) {
        const int a = i * n_[1] + j;
        if (vals_[a] >= threshold) continue;
        if (i + 1 < n_[0] && vals_[a + n_[1]] < threshold) uf.unite(a, a + n_[1]);
        if (j + 1 < n_[1] && vals_[a + 1] < threshold) uf.unite(a, a + 1);
      }
  }
  std::vector<int> labels(nodes(), -1);
  std::vector<int> remap(nodes(), -1);
  int next = 0;
  for (int a = 0; a < nodes(); ++a) {
    if (vals_[a] >= threshold) continue;
    const int r = uf.find(a);
    if (remap[r] < 0) remap[r] = next++;
    labels[a] = remap[r];
  }
  return labels;
}

int SublevelGrid::component_count(const std::vector<int>& labels) {
  int m = -1;
  for (int l : labels) m = std::max(m, l);
  return m + 1;
}

}  // namespace metaboltz
