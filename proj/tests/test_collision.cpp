#include <doctest.h>

#include <cmath>

#include "metaboltz/collision.hpp"
#include "metaboltz/errors.hpp"
#include "oracles.hpp"

using namespace metaboltz;

TEST_CASE("rate functions satisfy Hypothesis-1 style bounds") {
  for (auto r : {mild_relaxation_rate(), linear_rate(), mild_relaxation_rate(2.0)}) {
    CAPTURE(r.name);
    auto chk = validate_rate(r, 4.0);
    CHECK(chk.rho0 == 0.0);
    CHECK(chk.max_bound_violation <= 0.0);
    CHECK(chk.prime0_err < 1e-8);
    CHECK(chk.ok);
  }
}

TEST_CASE("m0_at_rest") {
  SUBCASE("mild relaxation gives the identity") {
    auto m = make_bgk(mild_relaxation_rate());
    CHECK(m0_at_rest(m)(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("scaled rate 2t/(1+t) gives 2 Id, limit oracle agrees") {
    auto r = mild_relaxation_rate(2.0);
    // derivative-at-origin oracle: Richardson limit of rho(eps)/eps
    const double e1 = r.rho(1e-5) / 1e-5, e2 = r.rho(5e-6) / 5e-6;
    const double oracle = 2 * e2 - e1;
    CHECK(oracle == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(m0_at_rest(make_bgk(r))(0, 0) == doctest::Approx(oracle).epsilon(1e-9));
  }
  SUBCASE("constant matrix passes through") {
    Mat m0(2, 2);
    m0 << 1, 0, 0, 3;
    CHECK((m0_at_rest(make_constant_matrix(m0)) - m0).norm() == 0.0);
  }
}

TEST_CASE("q_hermite_diagonal") {
  auto mild = make_bgk(mild_relaxation_rate());
  Vec d = q_hermite_diagonal(mild, 0.1, 6);
  CHECK(d[0] == 0.0);
  CHECK(d[3] == doctest::Approx(0.3 / 1.3).epsilon(1e-14));
  auto lin = make_bgk(linear_rate());
  // d = 2 multi-index (1,2): entry depends on the total level |n| = 3
  CHECK(q_hermite_diagonal(lin, 0.2, 4)[3] == doctest::Approx(0.6).epsilon(1e-14));
  Mat m0 = Mat::Identity(2, 2);
  CHECK_THROWS_AS(q_hermite_diagonal(make_constant_matrix(m0), 0.1, 4),
                  MatrixKindUnsupported);
}

TEST_CASE("ladder matrices") {
  const double h = 0.1;
  auto [b, bs] = ladder_matrices(h, 4);
  SUBCASE("b*b is the H0 spectrum h n") {
    Mat n = bs * b;
    for (int k = 0; k <= 4; ++k) CHECK(n(k, k) == doctest::Approx(h * k).epsilon(1e-14));
    CHECK((n - Mat(n.diagonal().asDiagonal())).norm() == 0.0);
  }
  SUBCASE("adjointness: b* equals the transpose of b exactly") {
    CHECK((bs - b.transpose()).norm() == 0.0);
  }
  SUBCASE("commutator h Id on the truncation interior") {
    Mat c = b * bs - bs * b;
    for (int k = 0; k < 4; ++k) CHECK(c(k, k) == doctest::Approx(h).epsilon(1e-14));
    CHECK(c(4, 4) == doctest::Approx(-4 * h));  // truncation defect at the top
  }
  SUBCASE("<(b+b*) psi_1, psi_2> against the quadrature oracle") {
    // v-multiplication matrix element with explicit Hermite functions
    const double want = (b + bs)(2, 1);
    const double got = oracles::quad(
        [h](double v) {
          return v * oracles::hermite_psi(1, v, h) * oracles::hermite_psi(2, v, h);
        },
        -12.0, 12.0, 40001);
    CHECK(want == doctest::Approx(std::sqrt(2 * h)).epsilon(1e-12));
    CHECK(got == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("microscopic coercivity of the Hermite diagonal") {
  for (double h : {0.2, 0.1, 0.05}) {
    CAPTURE(h);
    auto chk = check_coercivity(make_bgk(mild_relaxation_rate(), 1, 4.0), h, 60);
    CHECK(chk.entry0 == 0.0);
    CHECK(chk.min_margin >= 0.0);
    CHECK(chk.min_bound_margin >= 0.0);
    CHECK(chk.ok);
  }
}
