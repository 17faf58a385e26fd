#include "metaboltz/discretization.hpp"

#include <Eigen/SparseLU>
#include <cmath>
#include <mutex>
#include <vector>

#include "metaboltz/errors.hpp"

namespace metaboltz {

using Triplet = Eigen::Triplet<double>;
using CSpMat = Eigen::SparseMatrix<std::complex<double>>;

struct AssembledOperator::Cache {
  std::mutex mtx;
  std::map<std::pair<double, double>, std::shared_ptr<Eigen::SparseLU<CSpMat>>> lu;
  std::map<double, std::shared_ptr<Eigen::SparseLU<SpMat>>> lu_real;
};

namespace {

// index of (x node i, hermite level n)
inline int idx(int i, int n, int nH) { return i * nH + n; }

}  // namespace

AssembledOperator assemble(const Potential& P, const CollisionModel& model,
                           const AssembleOptions& opt) {
  if (P.dim != 1) throw ConfigError("assemble requires d = 1");
  AssembledOperator op;
  op.h = opt.h;
  op.nx = opt.nx;
  op.nHermite = opt.nHermite;
  op.scheme = opt.scheme;
  op.xmin = opt.window_lo == 0 && opt.window_hi == 0 ? P.window.lo[0] : opt.window_lo;
  op.xmax = opt.window_lo == 0 && opt.window_hi == 0 ? P.window.hi[0] : opt.window_hi;
  op.dx = (op.xmax - op.xmin) / opt.nx;
  op.cache_ = std::make_shared<AssembledOperator::Cache>();

  const int nx = opt.nx, nH = opt.nHermite;
  const double h = opt.h, dx = op.dx;

  op.centers.resize(nx);
  op.edges.resize(nx);
  for (int i = 0; i < nx; ++i) {
    op.centers[i] = op.xmin + (i + 0.5) * dx;
    op.edges[i] = op.xmin + i * dx;
  }
  Vec Vc(nx), dVe(nx), dVc(nx), Ve(nx);
  for (int i = 0; i < nx; ++i) {
    Vc[i] = P.eval1(op.centers[i]);
    Ve[i] = P.eval1(op.edges[i]);
    dVe[i] = P.grad1(op.edges[i]);
    dVc[i] = P.grad1(op.centers[i]);
  }
  op.potential_on_centers_ = Vc;

  if (opt.validate_window) {
    const double vmin = std::min(Vc.minCoeff(), Ve.minCoeff());
    const double wb = std::max(std::exp(-(P.eval1(op.xmin) - vmin) / (2 * h)),
                               std::exp(-(P.eval1(op.xmax) - vmin) / (2 * h)));
    if (wb > 1e-8)
      throw WindowTooSmall("boundary Maxwellian weight " + std::to_string(wb) +
                           " exceeds 1e-8; enlarge the window for h = " + std::to_string(h));
  }

  // transport blocks between levels n and n+1; D maps across the staggered grids.
  // raising from even n (centers) to odd n+1 (edges):
  //   (D_oe f)_i = (f_i - f_{i-1})/dx,  (W_oe g)_i = dV(e_i) (g_{i-1} + g_i)/2
  // raising from odd n (edges) to even n+1 (centers):
  //   (D_eo f)_i = (f_{i+1} - f_i)/dx,  (W_eo g)_i = (dV(e_i) g_i + dV(e_{i+1}) g_{i+1})/2
  // ghost values beyond the range are zero (Dirichlet truncation).
  std::vector<Triplet> trip;
  trip.reserve(static_cast<size_t>(nx) * nH * 6);

  auto add = [&](int r, int c, double v) {
    if (v != 0.0) trip.emplace_back(r, c, v);
  };

  for (int n = 0; n + 1 < nH; ++n) {
    const double cpl = std::sqrt(h * (n + 1));
    if (n % 2 == 0) {
      // up-block U: edges(n+1) <- centers(n):  U = cpl h D_oe + (cpl/2) W_oe
      for (int i = 0; i < nx; ++i) {
        add(idx(i, n + 1, nH), idx(i, n, nH), cpl * h / dx + cpl / 2 * dVe[i] / 2);
        if (i - 1 >= 0)
          add(idx(i, n + 1, nH), idx(i - 1, n, nH), -cpl * h / dx + cpl / 2 * dVe[i] / 2);
      }
      // down-block: centers(n) <- edges(n+1) = -U^T
      for (int i = 0; i < nx; ++i) {
        add(idx(i, n, nH), idx(i, n + 1, nH), -(cpl * h / dx + cpl / 2 * dVe[i] / 2));
        if (i - 1 >= 0)
          add(idx(i - 1, n, nH), idx(i, n + 1, nH), cpl * h / dx - cpl / 2 * dVe[i] / 2);
      }
    } else {
      // up-block U: centers(n+1) <- edges(n):  U = cpl h D_eo + (cpl/2) W_eo
      for (int i = 0; i < nx; ++i) {
        add(idx(i, n + 1, nH), idx(i, n, nH), -cpl * h / dx + cpl / 2 * dVe[i] / 2);
        if (i + 1 < nx)
          add(idx(i, n + 1, nH), idx(i + 1, n, nH), cpl * h / dx + cpl / 2 * dVe[i + 1] / 2);
      }
      for (int i = 0; i < nx; ++i) {
        add(idx(i, n, nH), idx(i, n + 1, nH), cpl * h / dx - cpl / 2 * dVe[i] / 2);
        if (i + 1 < nx)
          add(idx(i + 1, n, nH), idx(i, n + 1, nH), -(cpl * h / dx + cpl / 2 * dVe[i + 1] / 2));
      }
    }
  }

  // collision: diagonal rho(h n) per level
  Vec rho = q_hermite_diagonal(model, h, nH - 1);
  for (int i = 0; i < nx; ++i)
    for (int n = 0; n < nH; ++n)
      if (rho[n] != 0.0) add(idx(i, n, nH), idx(i, n, nH), rho[n]);

  // upwind option: PSD second-difference dissipation scaled by the level speed
  if (opt.scheme == Scheme::Upwind) {
    for (int n = 0; n < nH; ++n) {
      const double eta = 0.5 * dx * h * std::sqrt(h * std::max(n, 1));
      for (int i = 0; i < nx; ++i) {
        double diag = 0;
        if (i - 1 >= 0) {
          diag += 1;
          add(idx(i, n, nH), idx(i - 1, n, nH), -eta / (dx * dx));
        }
        if (i + 1 < nx) {
          diag += 1;
          add(idx(i, n, nH), idx(i + 1, n, nH), -eta / (dx * dx));
        }
        add(idx(i, n, nH), idx(i, n, nH), eta * diag / (dx * dx));
      }
    }
  }

  op.matrix.resize(nx * nH, nx * nH);
  op.matrix.setFromTriplets(trip.begin(), trip.end());
  op.matrix.makeCompressed();

  // Hermite tail of the computed kernel vector (truncation diagnostic):
  // one inverse iteration from the analytic Maxwellian profile
  if (opt.tail_check) {
    Vec k = op.solve_shifted_real(-1e-10 * op.norm_estimate(), op.kernel_vector());
    k.normalize();
    double tail = 0;
    for (int i = 0; i < nx; ++i)
      for (int n = nH - 2; n < nH; ++n) tail += k[idx(i, n, nH)] * k[idx(i, n, nH)];
    if (std::sqrt(tail) > 1e-6)
      throw TailMass("top-two Hermite levels carry " + std::to_string(std::sqrt(tail)) +
                     " of the kernel vector norm");
  }
  return op;
}

Vec AssembledOperator::kernel_vector() const {
  Vec k = Vec::Zero(size());
  const double vmin = potential_on_centers_.minCoeff();
  for (int i = 0; i < nx; ++i)
    k[idx(i, 0, nHermite)] = std::exp(-(potential_on_centers_[i] - vmin) / (2 * h));
  k.normalize();
  return k;
}

double AssembledOperator::norm_estimate() const {
  Vec rowsum = Vec::Zero(size());
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (SpMat::InnerIterator it(matrix, k); it; ++it)
      rowsum[it.row()] += std::abs(it.value());
  return rowsum.maxCoeff();
}

CVec AssembledOperator::solve_shifted(std::complex<double> z, const CVec& rhs) const {
  std::shared_ptr<Eigen::SparseLU<CSpMat>> lu;
  {
    std::lock_guard<std::mutex> lock(cache_->mtx);
    auto key = std::make_pair(z.real(), z.imag());
    auto it = cache_->lu.find(key);
    if (it != cache_->lu.end()) {
      lu = it->second;
    } else {
      CSpMat Az = matrix.cast<std::complex<double>>();
      for (int i = 0; i < size(); ++i) Az.coeffRef(i, i) -= z;
      Az.makeCompressed();
      lu = std::make_shared<Eigen::SparseLU<CSpMat>>();
      lu->compute(Az);
      if (lu->info() != Eigen::Success)
        throw SingularShift("sparse LU failed at shift " + std::to_string(z.real()) + "+" +
                            std::to_string(z.imag()) + "i");
      cache_->lu[key] = lu;
    }
  }
  CVec w = lu->solve(rhs);
  // iterative refinement
  const double target = 1e-10 * rhs.norm();
  for (int it = 0; it < 5; ++it) {
    CVec r = rhs - (matrix * w - z * w);
    if (r.norm() <= target) break;
    w += lu->solve(r);
  }
  CVec r = rhs - (matrix * w - z * w);
  if (!(r.norm() <= 1e3 * target))
    throw SingularShift("shifted solve did not refine: residual " + std::to_string(r.norm()));
  return w;
}

CVec AssembledOperator::solve_shifted_adjoint(std::complex<double> z, const CVec& rhs) const {
  // (A - z)^* = A^T - conj(z): reuse the factorization of (A - z) via adjoint solve
  std::shared_ptr<Eigen::SparseLU<CSpMat>> lu;
  const auto key = std::make_pair(z.real(), z.imag());
  {
    std::lock_guard<std::mutex> lock(cache_->mtx);
    auto it = cache_->lu.find(key);
    if (it != cache_->lu.end()) lu = it->second;
  }
  if (!lu) {
    solve_shifted(z, CVec::Zero(size()));  // populate cache
    std::lock_guard<std::mutex> lock(cache_->mtx);
    lu = cache_->lu.at(key);
  }
  CVec w = lu->adjoint().solve(rhs);
  const double target = 1e-10 * rhs.norm();
  const std::complex<double> zc = std::conj(z);
  for (int it = 0; it < 5; ++it) {
    CVec r = rhs - (matrix.transpose() * w - zc * w);
    if (r.norm() <= target) break;
    w += lu->adjoint().solve(r);
  }
  return w;
}

namespace {

Vec refine_real(const SpMat& A, double z, const Vec& rhs,
                const std::function<Vec(const Vec&)>& solve, bool transpose) {
  Vec w = solve(rhs);
  const double target = 1e-10 * rhs.norm();
  for (int it = 0; it < 5; ++it) {
    Vec r = transpose ? (rhs - (A.transpose() * w - z * w)).eval()
                      : (rhs - (A * w - z * w)).eval();
    if (r.norm() <= target) break;
    w += solve(r);
  }
  return w;
}

}  // namespace

Vec AssembledOperator::solve_shifted_real(double z, const Vec& rhs) const {
  std::shared_ptr<Eigen::SparseLU<SpMat>> lu;
  {
    std::lock_guard<std::mutex> lock(cache_->mtx);
    auto it = cache_->lu_real.find(z);
    if (it != cache_->lu_real.end()) {
      lu = it->second;
    } else {
      SpMat Az = matrix;
      for (int i = 0; i < size(); ++i) Az.coeffRef(i, i) -= z;
      Az.makeCompressed();
      lu = std::make_shared<Eigen::SparseLU<SpMat>>();
      lu->compute(Az);
      if (lu->info() != Eigen::Success)
        throw SingularShift("sparse LU failed at shift " + std::to_string(z));
      cache_->lu_real[z] = lu;
    }
  }
  return refine_real(matrix, z, rhs, [&](const Vec& b) { return lu->solve(b).eval(); },
                     false);
}

Vec AssembledOperator::solve_shifted_real_transpose(double z, const Vec& rhs) const {
  std::shared_ptr<Eigen::SparseLU<SpMat>> lu;
  {
    std::lock_guard<std::mutex> lock(cache_->mtx);
    auto it = cache_->lu_real.find(z);
    if (it != cache_->lu_real.end()) lu = it->second;
  }
  if (!lu) {
    solve_shifted_real(z, Vec::Zero(size()));
    std::lock_guard<std::mutex> lock(cache_->mtx);
    lu = cache_->lu_real.at(z);
  }
  return refine_real(matrix, z, rhs,
                     [&](const Vec& b) { return lu->transpose().solve(b).eval(); }, true);
}

void AssembledOperator::drop_shift_cache() const {
  std::lock_guard<std::mutex> lock(cache_->mtx);
  cache_->lu.clear();
  cache_->lu_real.clear();
}

}  // namespace metaboltz
