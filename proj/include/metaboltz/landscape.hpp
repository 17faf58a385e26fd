#pragma once

#include <limits>
#include <memory>
#include <vector>

#include "metaboltz/gridconn.hpp"
#include "metaboltz/potential.hpp"

namespace metaboltz {

/// Nondegenerate critical point with Morse classification.
struct CriticalPoint {
  Vec location;
  int index = 0;      // number of negative Hessian eigenvalues
  double value = 0;   // V at location
  Mat hessian;
  Vec hessEigen;      // ascending
};

/// Locates critical points by Newton iterations from a seed lattice (gradient
/// descent fallback), deduplicated and sorted by value.
/// Throws DegenerateCritical or NoMinima.
std::vector<CriticalPoint> find_critical_points(const Potential& P, int seeds_per_axis);

/// Result of the separating-saddle analysis at a given grid resolution.
struct SaddleAnalysis {
  std::vector<double> separating_values;        // distinct V(s)/2, decreasing
  std::vector<CriticalPoint> separating_saddles;
  std::shared_ptr<SublevelGrid> grid;
  double quantum = 0;  // energy resolution near the candidate levels
  double delta = 0;    // sublevel offset used (2 quanta)
};

/// Decides which index-1 points separate (flood fill of {V/2 < V(s)/2 - delta};
/// the two descent directions must land in different components).
/// Throws ResolutionTooCoarse or TieBreak.
SaddleAnalysis separating_saddles(const Potential& P,
                                  const std::vector<CriticalPoint>& critical,
                                  int grid_resolution);

/// Adapted labeling of the minima with the per-minimum maps E, j, sigma, S.
struct Labeling {
  struct Entry {
    CriticalPoint minimum;
    int rank_k = 0;                     // level index (1 = global minimum)
    int j = 1;                          // position within level
    double sigma = kInf;                // separating value bounding E(m)
    double S = kInf;                    // sigma - V(m)/2
    std::vector<CriticalPoint> saddles; // j(m); empty for the global minimum
    std::vector<int> region_nodes;      // E(m) as grid nodes (component at sigma - delta)
    double region_lo = 0, region_hi = 0;  // d=1 interval hull of E(m)
  };
  std::vector<Entry> minima;            // global minimum first, then by decreasing S
  std::vector<double> separating_values;
  std::shared_ptr<SublevelGrid> grid;
  double quantum = 0;
  double delta = 0;

  const Entry& global_minimum() const { return minima.front(); }
  int n0() const { return static_cast<int>(minima.size()); }
};

/// Builds the adapted labeling (levels processed downward; rank k assigned to the
/// global minimum of each newly created component) and validates Hypothesis 4.
/// Throws HypothesisJVideViolated.
Labeling build_labeling(const Potential& P, const std::vector<CriticalPoint>& critical,
                        const SaddleAnalysis& saddles);

/// Comparison of the separating-saddle values of W(x,v) = V(x)/2 + v^2/4 with
/// those of V/2 (d = 1 only).
struct LiftReport {
  std::vector<double> v_values;   // separating values of V/2
  std::vector<double> w_values;   // separating values of W
  double max_value_diff = 0;
  double max_saddle_v_offset = 0; // |v| coordinate of W-saddles
  bool ok = false;
};

/// Throws MismatchDetected when the lists disagree beyond grid tolerance.
LiftReport lift_check_W(const Potential& P, const Labeling& L, int grid_resolution);

}  // namespace metaboltz
