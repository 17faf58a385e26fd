#pragma once

#include <vector>

#include "metaboltz/potential.hpp"

namespace metaboltz {

/// Union-find over grid nodes.
class UnionFind {
 public:
  explicit UnionFind(int n) : parent_(n), rank_(n, 0) {
    for (int i = 0; i < n; ++i) parent_[i] = i;
  }
  int find(int a) {
    while (parent_[a] != a) {
      parent_[a] = parent_[parent_[a]];
      a = parent_[a];
    }
    return a;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return;
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    if (rank_[a] == rank_[b]) ++rank_[a];
  }

 private:
  std::vector<int> parent_;
  std::vector<int> rank_;
};

/// Uniform grid over a window (d = 1 or 2) holding sampled values of V/2,
/// with flood-fill connectivity of strict sublevel sets.
class SublevelGrid {
 public:
  SublevelGrid(const Potential& P, int resolution);

  int dim() const { return dim_; }
  int nodes() const { return static_cast<int>(vals_.size()); }
  int res(int axis) const { return n_[axis]; }
  double value(int node) const { return vals_[node]; }  // V/2 at node
  Vec coords(int node) const;
  int node_near(const Vec& x) const;  // nearest grid node
  double spacing(int axis) const { return dx_[axis]; }

  /// Largest |V/2 difference| across a grid edge: the energy resolution.
  double energy_quantum() const { return quantum_; }

  /// Energy resolution restricted to edges that can affect connectivity at
  /// thresholds <= level (both endpoints below the level).
  double energy_quantum_below(double level) const;

  /// Connected components of {V/2 < threshold}; component id per node, -1 above level.
  std::vector<int> flood(double threshold) const;

  /// Number of distinct components in a flood labeling.
  static int component_count(const std::vector<int>& labels);

 private:
  int dim_;
  int n_[2] = {1, 1};
  double dx_[2] = {0, 0};
  Vec lo_, hi_;
  std::vector<double> vals_;
  double quantum_ = 0;
};

}  // namespace metaboltz
