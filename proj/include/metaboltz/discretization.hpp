#pragma once

#include <Eigen/Sparse>
#include <complex>
#include <map>
#include <memory>

#include "metaboltz/collision.hpp"
#include "metaboltz/potential.hpp"

namespace metaboltz {

using SpMat = Eigen::SparseMatrix<double>;
using CVec = Eigen::VectorXcd;

enum class Scheme { Central, Upwind };

struct AssembleOptions {
  double h = 0.1;
  int nx = 400;
  int nHermite = 30;
  Scheme scheme = Scheme::Central;
  double window_lo = 0, window_hi = 0;  // 0,0: take the potential's window
  bool validate_window = true;
  bool tail_check = true;  // inverse-iteration kernel, top-two Hermite level mass
};

/// P_h = X0h + Q_h on a parity-staggered x-grid times a truncated Hermite basis
/// (d = 1). Even Hermite levels live at cell centers, odd levels at left edges;
/// the transport blocks are exactly skew-adjoint and second order.
/// State layout: index = i * nHermite + n (x-major).
class AssembledOperator {
 public:
  double h = 0;
  int nx = 0, nHermite = 0;
  double xmin = 0, xmax = 0, dx = 0;
  Scheme scheme = Scheme::Central;
  SpMat matrix;
  Vec centers, edges;  // nodes of the even / odd levels

  int size() const { return nx * nHermite; }
  double node(int i, int n) const { return (n % 2 == 0) ? centers[i] : edges[i]; }

  Vec apply(const Vec& v) const { return matrix * v; }
  Vec apply_transpose(const Vec& v) const { return matrix.transpose() * v; }

  /// Solves (A - z I) w = rhs by sparse LU with iterative refinement to
  /// residual <= 1e-10 ||rhs||; factorizations are cached per shift.
  /// Throws SingularShift.
  CVec solve_shifted(std::complex<double> z, const CVec& rhs) const;
  CVec solve_shifted_adjoint(std::complex<double> z, const CVec& rhs) const;
  Vec solve_shifted_real(double z, const Vec& rhs) const;
  Vec solve_shifted_real_transpose(double z, const Vec& rhs) const;

  /// Discrete kernel direction e^{-(V - min V)/2h} (x) psi_0, normalized.
  Vec kernel_vector() const;

  double norm_estimate() const;  // infinity norm

  void drop_shift_cache() const;

 private:
  friend AssembledOperator assemble(const Potential&, const CollisionModel&,
                                    const AssembleOptions&);
  Vec potential_on_centers_;
  struct Cache;
  std::shared_ptr<Cache> cache_;
};

/// Assembles the operator; validates the window (boundary Maxwellian mass) and
/// the Hermite tail of the kernel vector. Throws WindowTooSmall or TailMass.
AssembledOperator assemble(const Potential& P, const CollisionModel& model,
                           const AssembleOptions& opt);

}  // namespace metaboltz
