#include "metaboltz/schur.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <vector>

#include "metaboltz/errors.hpp"

namespace metaboltz::linalg {

namespace {

// Block layout of a quasi-triangular matrix: start index and size (1 or 2).
std::vector<std::pair<int, int>> block_layout(const Mat& T) {
  std::vector<std::pair<int, int>> blocks;
  const int n = static_cast<int>(T.rows());
  int i = 0;
  while (i < n) {
    if (i + 1 < n && T(i + 1, i) != 0.0) {
      blocks.emplace_back(i, 2);
      i += 2;
    } else {
      blocks.emplace_back(i, 1);
      i += 1;
    }
  }
  return blocks;
}

Cplx block_eig(const Mat& T, int i, int p) {
  if (p == 1) return {T(i, i), 0.0};
  const double a = T(i, i), b = T(i, i + 1), c = T(i + 1, i), d = T(i + 1, i + 1);
  const double mean = (a + d) / 2;
  const double disc = (a - d) * (a - d) / 4 + b * c;
  if (disc >= 0) return {mean + std::sqrt(disc), 0.0};  // shouldn't occur after RealSchur
  return {mean, std::sqrt(-disc)};
}

}  // namespace

void swap_schur_blocks(Mat& T, Mat& Q, int i, int p, int q) {
  const int n = static_cast<int>(T.rows());
  Mat A11 = T.block(i, i, p, p);
  Mat A22 = T.block(i + p, i + p, q, q);
  Mat A12 = T.block(i, i + p, p, q);

  // A11 X - X A22 = -A12, solved in Kronecker form (pq <= 4)
  Mat M = Mat::Zero(p * q, p * q);
  for (int j = 0; j < q; ++j) {
    M.block(j * p, j * p, p, p) = A11;
    for (int l = 0; l < q; ++l)
      M.block(j * p, l * p, p, p) -= A22(l, j) * Mat::Identity(p, p);
  }
  Eigen::Map<Eigen::VectorXd> rhs_map(A12.data(), p * q);
  Eigen::VectorXd rhs = -rhs_map;
  Eigen::VectorXd xv = M.fullPivLu().solve(rhs);
  Mat X = Eigen::Map<Mat>(xv.data(), p, q);

  // orthonormal basis of the A22-invariant subspace [X; I]
  Mat Z(p + q, q);
  Z.topRows(p) = X;
  Z.bottomRows(q) = Mat::Identity(q, q);
  Eigen::HouseholderQR<Mat> qr(Z);
  Mat G = qr.householderQ();

  T.middleCols(i, p + q).applyOnTheRight(G);
  T.middleRows(i, p + q) = G.transpose() * T.middleRows(i, p + q);
  Q.middleCols(i, p + q).applyOnTheRight(G);

  // clean the structural zeros of the swapped window
  T.block(i + q, i, p, q).setZero();
  (void)n;
}

std::vector<Cplx> schur_eigenvalues(const Mat& T) {
  std::vector<Cplx> out;
  for (auto [i, p] : block_layout(T)) {
    Cplx z = block_eig(T, i, p);
    out.push_back(z);
    if (p == 2) out.push_back(std::conj(z));
  }
  return out;
}

OrderedSchur ordered_real_schur(const Mat& A, const std::function<bool(Cplx)>& select) {
  Eigen::RealSchur<Mat> rs(A);
  OrderedSchur res;
  res.T = rs.matrixT();
  res.Q = rs.matrixU();

  // bubble selected blocks to the top, preserving relative order
  bool moved = true;
  while (moved) {
    moved = false;
    auto blocks = block_layout(res.T);
    for (size_t k = 0; k + 1 < blocks.size(); ++k) {
      auto [i0, p] = blocks[k];
      auto [i1, q] = blocks[k + 1];
      const bool s0 = select(block_eig(res.T, i0, p));
      const bool s1 = select(block_eig(res.T, i1, q));
      if (!s0 && s1) {
        swap_schur_blocks(res.T, res.Q, i0, p, q);
        moved = true;
        break;
      }
    }
  }
  res.selected = 0;
  for (auto [i, p] : block_layout(res.T)) {
    if (select(block_eig(res.T, i, p)))
      res.selected += p;
    else
      break;
  }
  return res;
}

}  // namespace metaboltz::linalg
