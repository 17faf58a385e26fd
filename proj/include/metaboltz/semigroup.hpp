#pragma once

#include <vector>

#include "metaboltz/spectrum.hpp"

namespace metaboltz {

/// Oblique spectral projectors onto nested small-eigenvalue clusters, built
/// from right and left eigenbases: P u = V (W^T V)^{-1} W^T u.
class SpectralProjectors {
 public:
  /// Clusters are prefixes of the modulus-sorted small eigenvalues grouped by
  /// magnitude scale (break at ratio > scale_break between consecutive |lambda|).
  SpectralProjectors(const SpectralResult& right, const SpectralResult& left,
                     double scale_break = 50.0);

  int clusters() const { return static_cast<int>(cluster_sizes_.size()); }
  int cluster_size(int k) const { return cluster_sizes_[k]; }  // eigenvalue count
  Vec apply(int k, const Vec& u) const;  // projection onto cluster prefix k (0 = kernel)

 private:
  Mat V_, W_;  // real bases, one column per eigenvalue (pairs expanded)
  std::vector<int> cluster_sizes_;  // prefix sizes, ascending
};

struct EvolvePolicy {
  double t_end = 1e6;
  int steps_per_decade = 20;
  double dt_cap = kInf;            // cap on the time step (resolves the slowest rate)
  bool crank_nicolson = true;      // otherwise backward Euler
};

struct Snapshot {
  double t = 0;
  double norm = 0;
  double dist_kernel = 0;               // ||u - P_1 u|| / ||u0||
  std::vector<double> dist_cluster;     // per prefix cluster
};

struct EvolutionRun {
  double h = 0;
  std::vector<Snapshot> snaps;
  Vec u_final;
};

/// Integrates u' = -(1/h) P_h u with unconditionally stable implicit steps on a
/// geometric time grid spanning [h, t_end]. Throws SolverFailure.
EvolutionRun evolve(const AssembledOperator& op, const Vec& u0,
                    const SpectralProjectors& proj, const EvolvePolicy& policy);

/// Least-squares fit of log dist_kernel over the final window (largest usable
/// decade span); returns rate (in t units, so rate*h compares with Re lambda*).
struct DecayFit {
  double rate = 0;
  double rate_times_h = 0;
  double residual = 0;
  int points = 0;
};
DecayFit decay_rate(const EvolutionRun& run, double fit_floor = 1e-12);

/// Plateau intervals: maximal windows where dist_cluster[k] stays below the
/// threshold while spanning at least one decade.
struct Plateau {
  int cluster = 0;
  double t_begin = 0, t_end = 0;
  double decades = 0;
};
struct PlateauReport {
  std::vector<Plateau> plateaus;
  double onset_ratio = 0;  // t_begin ratio of consecutive plateaus
};
PlateauReport plateau_report(const EvolutionRun& run, double threshold = 1e-3);

}  // namespace metaboltz
