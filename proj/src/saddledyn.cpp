#include "metaboltz/saddledyn.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "metaboltz/errors.hpp"
#include "metaboltz/schur.hpp"

namespace metaboltz {

namespace {

Mat hess_W(const Mat& hessV) {
  const int d = static_cast<int>(hessV.rows());
  Mat HW = Mat::Zero(2 * d, 2 * d);
  HW.topLeftCorner(d, d) = hessV / 2;
  HW.bottomRightCorner(d, d) = Mat::Identity(d, d) / 2;
  return HW;
}

}  // namespace

SaddleData SaddleData::from(const CriticalPoint& s, const CollisionModel& model) {
  SaddleData sd;
  sd.location = s.location;
  sd.hessV = s.hessian;
  sd.mu = s.hessEigen[0];
  sd.m0 = m0_at_rest(model);
  if (s.index != 1)
    throw ImaginaryAxisSpectrum("SaddleData requires an index-1 critical point");
  return sd;
}

Mat linearization_F(const SaddleData& sd) {
  const int d = static_cast<int>(sd.hessV.rows());
  Mat F = Mat::Zero(4 * d, 4 * d);
  const Mat I = Mat::Identity(d, d);
  F.block(0, d, d, d) = I;
  F.block(d, 0, d, d) = -sd.hessV;
  F.block(d, 3 * d, d, d) = 2 * sd.m0;
  F.block(2 * d, 3 * d, d, d) = sd.hessV;
  F.block(3 * d, d, d, d) = sd.m0 / 2;
  F.block(3 * d, 2 * d, d, d) = -I;

  Eigen::EigenSolver<Mat> es(F);
  const auto ev = es.eigenvalues();
  const double scale = std::max(1.0, F.cwiseAbs().maxCoeff());
  for (int i = 0; i < ev.size(); ++i) {
    if (std::abs(ev[i].real()) < 1e-8 * scale)
      throw ImaginaryAxisSpectrum("eigenvalue " + std::to_string(ev[i].real()) + " + " +
                                  std::to_string(ev[i].imag()) + "i near the imaginary axis");
    double best = kInf;
    for (int j = 0; j < ev.size(); ++j) best = std::min(best, std::abs(ev[i] + ev[j]));
    if (best > 1e-8 * scale)
      throw ImaginaryAxisSpectrum("spectrum of F is not centrally symmetric");
  }
  return F;
}

namespace {

Mat graph_over_base(const Mat& F, bool positive_halfplane) {
  const int n2 = static_cast<int>(F.rows()) / 2;
  auto sel = [positive_halfplane](linalg::Cplx z) {
    return positive_halfplane ? z.real() > 0 : z.real() < 0;
  };
  auto os = linalg::ordered_real_schur(F, sel);
  if (os.selected != n2)
    throw NotAGraph("invariant subspace has dimension " + std::to_string(os.selected) +
                    ", expected " + std::to_string(n2));
  Mat base = os.Q.topLeftCorner(n2, n2);
  Mat fiber = os.Q.bottomLeftCorner(n2, n2);
  Eigen::FullPivLU<Mat> lu(base);
  if (!lu.isInvertible())
    throw NotAGraph("subspace is not transverse to the fiber (base block singular)");
  Mat G = fiber * lu.inverse();
  const double defect = (G - G.transpose()).cwiseAbs().maxCoeff();
  if (defect > 1e-9)
    throw NotAGraph("graph matrix symmetry defect " + std::to_string(defect));
  return (G + G.transpose()) / 2;
}

}  // namespace

std::pair<Mat, Mat> stable_phase(const SaddleData& sd) {
  Mat F = linearization_F(sd);
  Mat plus = graph_over_base(F, true);
  Mat minus = graph_over_base(F, false);
  Eigen::SelfAdjointEigenSolver<Mat> ep(plus), em(-minus);
  if (ep.eigenvalues().minCoeff() <= 0)
    throw NotAGraph("Hess(phi_plus) is not positive definite");
  if (em.eigenvalues().minCoeff() <= 0)
    throw NotAGraph("-Hess(phi_minus) is not positive definite");
  return {plus, minus};
}

SaddlePrefactor phi_eigenproblem(const SaddleData& sd) {
  const int d = static_cast<int>(sd.hessV.rows());
  Mat Phi = Mat::Zero(2 * d, 2 * d);
  Phi.topRightCorner(d, d) = -sd.hessV;
  Phi.bottomLeftCorner(d, d) = Mat::Identity(d, d);
  Phi.bottomRightCorner(d, d) = sd.m0;

  Eigen::EigenSolver<Mat> es(Phi);
  const auto ev = es.eigenvalues();
  const double scale = std::max(1.0, Phi.cwiseAbs().maxCoeff());
  int idx = -1;
  int count = 0;
  for (int i = 0; i < ev.size(); ++i) {
    if (ev[i].real() <= 1e-12 * scale) {
      ++count;
      if (idx < 0 || ev[i].real() < ev[idx].real()) idx = i;
    }
  }
  if (count != 1)
    throw MultipleNonpositiveEigenvalues(std::to_string(count) +
                                         " eigenvalues of Phi have Re <= 0; expected 1");
  if (std::abs(ev[idx].imag()) > 1e-10 * scale)
    throw ComplexLeftmostEigenvalue("leftmost eigenvalue has imaginary part " +
                                    std::to_string(ev[idx].imag()));

  SaddlePrefactor out;
  out.alpha0 = -ev[idx].real();
  Vec u = es.eigenvectors().col(idx).real();
  if (u.norm() == 0) u = es.eigenvectors().col(idx).imag();
  u.normalize();
  if (u.tail(d).norm() < 1e-12)
    throw MultipleNonpositiveEigenvalues("nu2 component vanishes");

  // scale fixed by det(HW + t^2 u u^T) = 2^{-2d} |det HessV|, linear in t^2
  const Mat HW = hess_W(sd.hessV);
  const double target = std::pow(2.0, -2 * d) * std::abs(sd.hessV.determinant());
  const double detHW = HW.determinant();
  const double c = u.dot(HW.fullPivLu().solve(u));
  const double t2 = (target / detHW - 1.0) / c;
  if (!(t2 > 0))
    throw MultipleNonpositiveEigenvalues("determinant identity has no positive scale");
  out.nu = std::sqrt(t2) * u;
  out.hessPhiPlus = HW + out.nu * out.nu.transpose();
  out.detIdentityResidual =
      std::abs(out.hessPhiPlus.determinant() - target) / std::abs(target);

  // cross-check alpha0 = M0 nu2 . nu2
  Vec nu2 = out.nu.tail(d);
  const double a0_check = nu2.dot(sd.m0 * nu2);
  if (std::abs(a0_check - out.alpha0) > 1e-10 * std::max(1.0, out.alpha0))
    throw MultipleNonpositiveEigenvalues("alpha0 cross-check failed: " +
                                         std::to_string(a0_check) + " vs " +
                                         std::to_string(out.alpha0));
  return out;
}

std::pair<double, double> bgk_closed_form(double mu, double rhoPrime0) {
  const double alpha0 = (-rhoPrime0 + std::sqrt(rhoPrime0 * rhoPrime0 - 4 * mu)) / 2;
  return {alpha0, alpha0 / rhoPrime0};
}

std::string debug_dump(const SaddleData& sd) {
  std::ostringstream os;
  Mat F = linearization_F(sd);
  os << "saddle at " << sd.location.transpose() << "\nmu = " << sd.mu << "\nF =\n"
     << F << "\n";
  Eigen::EigenSolver<Mat> ef(F);
  os << "spec(F) = " << ef.eigenvalues().transpose() << "\n";
  const int d = static_cast<int>(sd.hessV.rows());
  Mat Phi = Mat::Zero(2 * d, 2 * d);
  Phi.topRightCorner(d, d) = -sd.hessV;
  Phi.bottomLeftCorner(d, d) = Mat::Identity(d, d);
  Phi.bottomRightCorner(d, d) = sd.m0;
  Eigen::EigenSolver<Mat> ep(Phi);
  os << "Phi =\n" << Phi << "\nspec(Phi) = " << ep.eigenvalues().transpose() << "\n";
  return os.str();
}

}  // namespace metaboltz
