#pragma once

#include <complex>
#include <functional>

#include "metaboltz/potential.hpp"

namespace metaboltz::linalg {

using Mat = Eigen::MatrixXd;
using Cplx = std::complex<double>;

/// Real Schur form A = Q T Q^T with the blocks whose eigenvalues satisfy
/// `select` moved to the top-left. 2x2 blocks are kept intact (their complex
/// pairs are selected as a unit).
struct OrderedSchur {
  Mat T, Q;
  int selected = 0;  // dimension of the leading selected invariant subspace
};

OrderedSchur ordered_real_schur(const Mat& A, const std::function<bool(Cplx)>& select);

/// Eigenvalues of the (quasi-triangular) Schur factor, in block order.
std::vector<Cplx> schur_eigenvalues(const Mat& T);

/// Swaps the adjacent diagonal blocks at `i` (sizes p then q, each 1 or 2) of a
/// quasi-triangular T, accumulating the transform into Q. Exposed for testing.
void swap_schur_blocks(Mat& T, Mat& Q, int i, int p, int q);

}  // namespace metaboltz::linalg
