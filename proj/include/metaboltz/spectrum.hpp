#pragma once

#include <complex>
#include <vector>

#include "metaboltz/discretization.hpp"
#include "metaboltz/ekformula.hpp"

namespace metaboltz {

using Cplx = std::complex<double>;
using CMat = Eigen::MatrixXcd;

/// Small spectrum of the assembled operator near 0.
struct SpectralResult {
  double h = 0;
  std::vector<Cplx> smallEigs;       // sorted by modulus
  std::vector<double> residuals;     // ||A v - lambda v|| per eigenpair
  CMat vectors;                      // right eigenvectors, one column per eigenvalue
  double opNorm = 0;
  std::vector<std::pair<Cplx, double>> resolventProbes;
};

/// Krylov-Schur iteration on the shift-inverted operator (A - sigma)^{-1} with a
/// tiny regularizing sigma < 0; returns the `count` converged eigenvalues of A
/// nearest 0 with eigenpair residuals <= tol ||A||. Throws NotConverged.
/// With transpose = true solves the adjoint problem (left eigenvectors).
SpectralResult small_eigenvalues(const AssembledOperator& op, int count, double tol,
                                 bool transpose = false);

/// Estimates ||(A - z)^{-1}|| by inverse power iteration on (A-z)*(A-z) at
/// samples on the circle |z| = ctilde h^2 and the segment Re z = c h^2;
/// returns (z, estimate) pairs.
std::vector<std::pair<Cplx, double>> resolvent_probe(const AssembledOperator& op, double h,
                                                     double c, double ctilde, int nsamples);

/// Pairing of computed nonzero small eigenvalues with EK predictions by
/// magnitude order. Throws CountMismatch.
struct MatchRow {
  Cplx lambda_num;
  double lambda_ek = 0;
  double ratio = 0;
  bool flagged = false;
};
std::vector<MatchRow> match_predictions(const SpectralResult& sr,
                                        const std::vector<EKPrediction>& preds, double h,
                                        double band = 0.25);

}  // namespace metaboltz
