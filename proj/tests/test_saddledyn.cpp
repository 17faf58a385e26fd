#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <random>

#include "metaboltz/errors.hpp"
#include "metaboltz/saddledyn.hpp"
#include "oracles.hpp"

using namespace metaboltz;

namespace {

SaddleData make_sd(const Mat& hessV, const Mat& m0) {
  SaddleData sd;
  sd.location = Vec::Zero(hessV.rows());
  sd.hessV = hessV;
  Eigen::SelfAdjointEigenSolver<Mat> es(hessV);
  sd.mu = es.eigenvalues()[0];
  sd.m0 = m0;
  return sd;
}

}  // namespace

TEST_CASE("linearization F: d=1 standard example") {
  auto sd = make_sd(Mat::Constant(1, 1, -1.0), Mat::Constant(1, 1, 1.0));
  Mat F = linearization_F(sd);
  REQUIRE(F.rows() == 4);
  Eigen::EigenSolver<Mat> es(F);
  int pos = 0;
  for (int i = 0; i < 4; ++i) pos += (es.eigenvalues()[i].real() > 0);
  CHECK(pos == 2);

  // companion-matrix root oracle on det(F - lambda): char poly lambda^4 - 3 lambda^2 + 1
  auto roots = oracles::companion_roots({1.0, 0.0, -3.0, 0.0});
  std::vector<double> want, got;
  for (auto z : roots) want.push_back(z.real());
  for (int i = 0; i < 4; ++i) got.push_back(es.eigenvalues()[i].real());
  std::sort(want.begin(), want.end());
  std::sort(got.begin(), got.end());
  for (int i = 0; i < 4; ++i) CHECK(got[i] == doctest::Approx(want[i]).epsilon(1e-10));
  // golden-ratio eigenvalues
  CHECK(got[3] == doctest::Approx((1 + std::sqrt(5.0)) / 2).epsilon(1e-12));
  CHECK(got[2] == doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-12));
}

TEST_CASE("linearization F: d=2 splits 4/4 across the axis") {
  Mat hv = Mat::Zero(2, 2);
  hv.diagonal() << -1.0, 2.0;
  auto sd = make_sd(hv, Mat::Identity(2, 2));
  Mat F = linearization_F(sd);
  REQUIRE(F.rows() == 8);
  Eigen::EigenSolver<Mat> es(F);  // dense eigensolve oracle
  int pos = 0, neg = 0;
  for (int i = 0; i < 8; ++i) {
    pos += (es.eigenvalues()[i].real() > 0);
    neg += (es.eigenvalues()[i].real() < 0);
  }
  CHECK(pos == 4);
  CHECK(neg == 4);
}

TEST_CASE("phi eigenproblem: standard example and the determinant identity") {
  auto sd = make_sd(Mat::Constant(1, 1, -1.0), Mat::Constant(1, 1, 1.0));
  auto sp = phi_eigenproblem(sd);
  // quadratic formula oracle: negative root of l^2 - rho'(0) l + mu
  const double root = oracles::bisect(
      [](double l) { return l * l - l - 1.0; }, -2.0, 0.0);
  CHECK(sp.alpha0 == doctest::Approx(-root).epsilon(1e-12));
  CHECK(sp.alpha0 == doctest::Approx(0.6180339887498949).epsilon(1e-12));
  CHECK(sp.detIdentityResidual < 1e-8);
  // Phi nu = -alpha0 nu
  Mat Phi = Mat::Zero(2, 2);
  Phi(0, 1) = 1.0;
  Phi(1, 0) = 1.0;
  Phi(1, 1) = 1.0;
  CHECK((Phi * sp.nu + sp.alpha0 * sp.nu).norm() < 1e-10 * sp.nu.norm());
}

TEST_CASE("phi eigenproblem: degenerate-barrier limit probe") {
  auto sd = make_sd(Mat::Constant(1, 1, -1e-6), Mat::Constant(1, 1, 1.0));
  auto sp = phi_eigenproblem(sd);
  CHECK(sp.alpha0 == doctest::Approx(1e-6).epsilon(1e-4));
}

TEST_CASE("phi eigenproblem: d=2 block diagonalization oracle") {
  Mat hv = Mat::Zero(2, 2);
  hv.diagonal() << -1.0, 2.0;
  auto sd = make_sd(hv, Mat::Identity(2, 2));
  auto sp = phi_eigenproblem(sd);
  // block oracle: the unstable direction reduces to the d=1 problem
  CHECK(sp.alpha0 == doctest::Approx(0.6180339887498949).epsilon(1e-10));
  // nu2 aligned with the mu-eigenvector e1
  Vec nu2 = sp.nu.tail(2);
  CHECK(std::abs(nu2[1]) < 1e-8 * nu2.norm());
  CHECK(sp.detIdentityResidual < 1e-8);
}

TEST_CASE("bgk closed form examples") {
  auto [a1, n1] = bgk_closed_form(-1.0, 1.0);
  CHECK(a1 == doctest::Approx((std::sqrt(5.0) - 1) / 2).epsilon(1e-14));
  CHECK(n1 == doctest::Approx(a1).epsilon(1e-14));
  auto [a2, n2] = bgk_closed_form(-6.0, 1.0);
  CHECK(a2 == doctest::Approx(2.0).epsilon(1e-14));
  // overdamped limit: alpha0 ~ -mu / rho'(0); series oracle at rho'(0) = 1e3
  auto [a3, n3] = bgk_closed_form(-1.0, 1e3);
  const double series = 1.0 / 1e3 - 1.0 / 1e9;  // -mu/r - mu^2/r^3 + ...
  CHECK(a3 == doctest::Approx(series).epsilon(1e-6));
}

TEST_CASE("stable phase graphs: definiteness and the phinu consistency") {
  auto sd = make_sd(Mat::Constant(1, 1, -1.0), Mat::Constant(1, 1, 1.0));
  auto [plus, minus] = stable_phase(sd);
  auto sp = phi_eigenproblem(sd);
  CHECK((plus - sp.hessPhiPlus).cwiseAbs().maxCoeff() < 1e-8);
  CHECK(std::abs(plus.determinant() - 0.25) < 1e-8);
  Eigen::SelfAdjointEigenSolver<Mat> ep(plus), em(-minus);
  CHECK(ep.eigenvalues().minCoeff() > 0);
  CHECK(em.eigenvalues().minCoeff() > 0);
  CHECK((plus - plus.transpose()).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("stable phase: d=2 graph matrices symmetric") {
  Mat hv = Mat::Zero(2, 2);
  hv.diagonal() << -1.0, 2.0;
  auto sd = make_sd(hv, Mat::Identity(2, 2));
  auto [plus, minus] = stable_phase(sd);
  REQUIRE(plus.rows() == 4);
  CHECK((plus - plus.transpose()).cwiseAbs().maxCoeff() < 1e-9);
  CHECK((minus - minus.transpose()).cwiseAbs().maxCoeff() < 1e-9);
  auto sp = phi_eigenproblem(sd);
  CHECK((plus - sp.hessPhiPlus).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("property: closed form agrees with the eigenproblem over random sweeps") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> umu(-10.0, -0.01), ur(0.05, 20.0);
  for (int trial = 0; trial < 200; ++trial) {
    const double mu = umu(rng), r = ur(rng);
    const int d = (trial % 2) ? 2 : 1;
    Mat hv, m0;
    if (d == 1) {
      hv = Mat::Constant(1, 1, mu);
      m0 = Mat::Constant(1, 1, r);
    } else {
      hv = Mat::Zero(2, 2);
      hv.diagonal() << mu, 1.7;
      m0 = r * Mat::Identity(2, 2);
    }
    auto sp = phi_eigenproblem(make_sd(hv, m0));
    auto [a_cf, nu2sq] = bgk_closed_form(mu, r);
    CAPTURE(mu);
    CAPTURE(r);
    CAPTURE(d);
    CHECK(std::abs(sp.alpha0 - a_cf) <= 1e-10 * std::max(1.0, a_cf));
    CHECK(sp.detIdentityResidual <= 1e-8);
    // nu-sign covariance: alpha0 and hessPhiPlus unchanged under nu -> -nu
    Mat hp2 = sp.hessPhiPlus - sp.nu * sp.nu.transpose() +
              (-sp.nu) * (-sp.nu).transpose();
    CHECK((hp2 - sp.hessPhiPlus).norm() == 0.0);
  }
}

TEST_CASE("property: scale covariance m0 -> c m0") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> umu(-5.0, -0.1), uc(0.2, 5.0);
  for (int trial = 0; trial < 50; ++trial) {
    const double mu = umu(rng), c = uc(rng);
    auto sp = phi_eigenproblem(make_sd(Mat::Constant(1, 1, mu), Mat::Constant(1, 1, c)));
    // lambda = -alpha0 solves lambda^2 - c lambda + mu = 0 with the scaled rate c
    const double res = sp.alpha0 * sp.alpha0 + c * sp.alpha0 + mu;
    CHECK(std::abs(res) < 1e-10 * std::max(1.0, std::abs(mu)));
  }
}

TEST_CASE("debug dump carries F, Phi and spectra") {
  auto sd = make_sd(Mat::Constant(1, 1, -1.0), Mat::Constant(1, 1, 1.0));
  const std::string dump = debug_dump(sd);
  CHECK(dump.find("spec(F)") != std::string::npos);
  CHECK(dump.find("spec(Phi)") != std::string::npos);
  CHECK(dump.find("mu = -1") != std::string::npos);
}

TEST_CASE("hypothesis violations are surfaced") {
  // two negative eigenvalues: not an index-1 saddle
  Mat hv = Mat::Zero(2, 2);
  hv.diagonal() << -1.0, -2.0;
  auto sd = make_sd(hv, Mat::Identity(2, 2));
  CHECK_THROWS_AS(phi_eigenproblem(sd), MultipleNonpositiveEigenvalues);
}
