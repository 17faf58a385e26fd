#pragma once

#include <utility>

#include "metaboltz/collision.hpp"
#include "metaboltz/landscape.hpp"

namespace metaboltz {

/// Linearization data at a separating saddle: Hess_s V (index 1) and the
/// collision rest matrix M0(s,0,0).
struct SaddleData {
  Vec location;
  Mat hessV;
  double mu = 0;  // the unique negative eigenvalue of hessV
  Mat m0;

  static SaddleData from(const CriticalPoint& s, const CollisionModel& model);
};

/// Prefactor data: the unique non-positive eigenvalue -alpha0 of Phi^s, the
/// normalized eigenvector nu = (nu1, nu2), and the quadratic phase Hessian.
struct SaddlePrefactor {
  double alpha0 = 0;
  Vec nu;             // in R^{2d}, scale fixed by the determinant identity
  Mat hessPhiPlus;    // Hess_s W + nu nu^T, positive definite
  double detIdentityResidual = 0;
};

/// The 4d x 4d phase-space linearization matrix
///   F = [ 0, Id, 0, 0 / -HessV, 0, 0, 2 M0 / 0, 0, 0, HessV / 0, M0/2, -Id, 0 ].
/// Asserts that no eigenvalue lies within 1e-8 of the imaginary axis and that
/// the spectrum is centrally symmetric; throws ImaginaryAxisSpectrum.
Mat linearization_F(const SaddleData& sd);

/// Graph matrices of the invariant subspaces of F over the base plane:
/// first = Hess(phi_plus) from the Re > 0 subspace (positive definite),
/// second = Hess(phi_minus) from the Re < 0 subspace (negative definite).
/// Throws NotAGraph when a subspace fails transversality.
std::pair<Mat, Mat> stable_phase(const SaddleData& sd);

/// Solves the Phi^s = [[0, -HessV],[Id, M0]] eigenproblem: extracts -alpha0 and
/// nu, rescales nu so det(Hess_s W + nu nu^T) = 2^{-2d} |det HessV|, and
/// cross-checks alpha0 = M0 nu2 . nu2.
SaddlePrefactor phi_eigenproblem(const SaddleData& sd);

/// BGK closed form: alpha0 = (-rho'(0) + sqrt(rho'(0)^2 - 4 mu))/2 and
/// nu2^2 = alpha0 / rho'(0).
std::pair<double, double> bgk_closed_form(double mu, double rhoPrime0);

/// Structured text dump of F, Phi and their spectra for one saddle.
std::string debug_dump(const SaddleData& sd);

}  // namespace metaboltz
