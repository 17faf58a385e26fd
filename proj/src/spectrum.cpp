#include "metaboltz/spectrum.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "metaboltz/errors.hpp"
#include "metaboltz/schur.hpp"

namespace metaboltz {

namespace {

struct ShiftInvertOp {
  const AssembledOperator& op;
  double sigma;
  bool transpose;

  Vec apply(const Vec& x) const {
    if (!transpose) return op.solve_shifted_real(sigma, x);
    // (A^T - sigma)^{-1} x : refine on the transposed system with the same LU
    // via solving (A - sigma)^T w = x. Eigen SparseLU exposes no transposed
    // solve before 3.4's adjoint API; keep a dedicated factorization instead.
    return op.solve_shifted_real_transpose(sigma, x);
  }
};

}  // namespace

SpectralResult small_eigenvalues(const AssembledOperator& op, int count, double tol,
                                 bool transpose) {
  const int n = op.size();
  const double opnorm = op.norm_estimate();
  const double sigma = -1e-10 * opnorm;

  const int k_want = count;
  const int k_keep = std::min(n - 2, count + 4);
  const int m = std::min(n - 1, std::max(3 * count, count + 12));

  Mat V(n, m + 1);
  Mat B = Mat::Zero(m + 1, m);  // square part rows 0..m-1, residual row m
  Vec v0 = op.kernel_vector();
  // deterministic start with mass on every component scale
  for (int i = 0; i < n; ++i) v0[i] += 1e-3 * std::cos(0.7 * i + 0.3);
  v0.normalize();
  V.col(0) = v0;

  ShiftInvertOp si{op, sigma, transpose};

  int kact = 0;  // current compact basis size (leading Schur part)
  const int max_restart = 12;
  bool converged = false;

  for (int restart = 0; restart < max_restart && !converged; ++restart) {
    // Arnoldi expansion from column kact to m
    for (int j = kact; j < m; ++j) {
      Vec w = si.apply(V.col(j));
      // twice classical Gram-Schmidt
      for (int pass = 0; pass < 2; ++pass) {
        Vec coef = V.leftCols(j + 1).transpose() * w;
        w -= V.leftCols(j + 1) * coef;
        B.col(j).head(j + 1) += coef;
      }
      const double beta = w.norm();
      if (beta < 1e-14) {
        // invariant subspace found; pad with a fresh direction
        Vec f = Vec::Zero(n);
        f[(j * 37) % n] = 1.0;
        Vec coef = V.leftCols(j + 1).transpose() * f;
        f -= V.leftCols(j + 1) * coef;
        f.normalize();
        V.col(j + 1) = f;
        B(j + 1, j) = 0.0;
      } else {
        V.col(j + 1) = w / beta;
        B(j + 1, j) = beta;
      }
    }

    // Schur of the square part; wanted = largest |theta|
    Mat H = B.topRows(m);
    std::vector<double> mags;
    {
      Eigen::EigenSolver<Mat> es(H);
      for (int i = 0; i < m; ++i) mags.push_back(std::abs(es.eigenvalues()[i]));
    }
    std::sort(mags.begin(), mags.end(), std::greater<>());
    const double cutoff = mags[std::min<size_t>(k_keep, mags.size()) - 1];
    auto os = linalg::ordered_real_schur(
        H, [cutoff](linalg::Cplx z) { return std::abs(z) >= cutoff * (1 - 1e-12); });
    int k = std::max(os.selected, k_want);
    k = std::min(k, m - 1);
    // avoid splitting a trailing 2x2 block
    if (k + 1 < m && os.T(k, k - 1) != 0.0) ++k;

    const double beta_m = B(m, m - 1);
    Eigen::RowVectorXd brow = beta_m * os.Q.row(m - 1).head(k);

    // convergence estimate for the k_want leading Ritz values
    Mat S = os.T.topLeftCorner(k, k);
    Eigen::EigenSolver<Mat> ses(S);
    std::vector<std::pair<double, int>> order;
    for (int i = 0; i < k; ++i) order.emplace_back(std::abs(ses.eigenvalues()[i]), i);
    std::sort(order.begin(), order.end(), std::greater<>());
    converged = true;
    for (int r = 0; r < std::min(k_want, k); ++r) {
      const int i = order[r].second;
      Eigen::VectorXcd y = ses.eigenvectors().col(i);
      const Cplx theta = ses.eigenvalues()[i];
      const double res = std::abs((brow.cast<Cplx>() * y)(0));
      // A-eigenpair residual is bounded by ||A - sigma|| res / |theta|
      if (res / std::max(1e-300, std::abs(theta)) > 0.3 * tol) converged = false;
    }

    // truncate to the Krylov-Schur form
    Mat Vnew = V.leftCols(m) * os.Q.leftCols(k);
    V.leftCols(k) = Vnew;
    V.col(k) = V.col(m);
    B.setZero();
    B.topLeftCorner(k, k) = os.T.topLeftCorner(k, k);
    B.row(k).head(k) = brow;
    kact = k;

    if (restart == max_restart - 1 && !converged)
      throw NotConverged("Krylov-Schur did not converge in " +
                         std::to_string(max_restart) + " restarts");
  }

  // final Ritz extraction from the locked part
  Mat S = B.topLeftCorner(kact, kact);
  Eigen::EigenSolver<Mat> ses(S);
  std::vector<std::pair<double, int>> order;
  for (int i = 0; i < kact; ++i) order.emplace_back(std::abs(ses.eigenvalues()[i]), i);
  std::sort(order.begin(), order.end(), std::greater<>());

  SpectralResult out;
  out.h = op.h;
  out.opNorm = opnorm;
  out.vectors.resize(n, k_want);
  const Mat& Vk = V;
  for (int r = 0; r < k_want; ++r) {
    const int i = order[r].second;
    const Cplx theta = ses.eigenvalues()[i];
    const Cplx lambda = sigma + 1.0 / theta;
    Eigen::VectorXcd y = ses.eigenvectors().col(i);
    Eigen::VectorXcd v = Vk.leftCols(kact).cast<Cplx>() * y;
    v.normalize();
    Eigen::VectorXcd Av = transpose
        ? (op.matrix.transpose() * v).eval()
        : (op.matrix * v).eval();
    const double res = (Av - lambda * v).norm();
    if (res > tol * opnorm)
      throw NotConverged("eigenpair residual " + std::to_string(res) + " exceeds " +
                         std::to_string(tol * opnorm));
    out.smallEigs.push_back(lambda);
    out.residuals.push_back(res);
    out.vectors.col(r) = v;
  }
  // sort by modulus
  std::vector<int> perm(k_want);
  for (int i = 0; i < k_want; ++i) perm[i] = i;
  std::sort(perm.begin(), perm.end(), [&](int a, int b) {
    return std::abs(out.smallEigs[a]) < std::abs(out.smallEigs[b]);
  });
  SpectralResult sorted = out;
  for (int i = 0; i < k_want; ++i) {
    sorted.smallEigs[i] = out.smallEigs[perm[i]];
    sorted.residuals[i] = out.residuals[perm[i]];
    sorted.vectors.col(i) = out.vectors.col(perm[i]);
  }
  return sorted;
}

std::vector<std::pair<Cplx, double>> resolvent_probe(const AssembledOperator& op, double h,
                                                     double c, double ctilde, int nsamples) {
  std::vector<std::pair<Cplx, double>> out;
  std::vector<Cplx> zs;
  for (int j = 0; j < nsamples; ++j) {
    const double phi = 2 * std::numbers::pi * (j + 0.31) / nsamples;
    zs.push_back(ctilde * h * h * Cplx(std::cos(phi), std::sin(phi)));
  }
  for (int j = 0; j < nsamples; ++j) {
    const double t = -1.0 + 2.0 * j / std::max(1, nsamples - 1);
    zs.push_back(Cplx(c * h * h, t * c * h * h));
  }
  const int n = op.size();
  for (const Cplx& z : zs) {
    CVec w = CVec::Ones(n);
    w.normalize();
    double rq = 0;
    for (int it = 0; it < 25; ++it) {
      CVec a = op.solve_shifted(z, w);          // (A - z)^{-1} w
      CVec b = op.solve_shifted_adjoint(z, a);  // (A - z)^{-*} a
      rq = std::sqrt(b.norm());
      w = b / b.norm();
    }
    out.emplace_back(z, rq);
  }
  return out;
}

std::vector<MatchRow> match_predictions(const SpectralResult& sr,
                                        const std::vector<EKPrediction>& preds, double h,
                                        double band) {
  // kernel = smallest-modulus eigenvalue; the next preds.size() pair by
  // magnitude with the predictions, which are ordered by decreasing S and
  // hence by increasing lambda already
  if (sr.smallEigs.size() < preds.size() + 1)
    throw CountMismatch("have " + std::to_string(sr.smallEigs.size()) +
                        " computed eigenvalues for " + std::to_string(preds.size()) +
                        " predictions");
  std::vector<MatchRow> rows;
  for (size_t i = 0; i < preds.size(); ++i) {
    MatchRow r;
    r.lambda_num = sr.smallEigs[i + 1];
    r.lambda_ek = preds[i].lambda(h);
    r.ratio = r.lambda_num.real() / r.lambda_ek;
    r.flagged = std::abs(r.ratio - 1.0) > band || std::abs(r.lambda_num.imag()) >
                                                      1e-8 * std::abs(r.lambda_num);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace metaboltz
