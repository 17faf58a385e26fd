#include <doctest.h>

#include <cmath>

#include "metaboltz/errors.hpp"
#include "metaboltz/landscape.hpp"
#include "metaboltz/spectrum.hpp"
#include "oracles.hpp"

using namespace metaboltz;

namespace {

AssembledOperator make_op(const char* name, double h, int nx, int nH) {
  AssembleOptions opt;
  opt.h = h;
  opt.nx = nx;
  opt.nHermite = nH;
  opt.tail_check = false;
  return assemble(make_builtin(name), make_bgk(mild_relaxation_rate()), opt);
}

std::vector<EKPrediction> predictions_for(const char* name) {
  Potential P = make_builtin(name);
  auto crit = find_critical_points(P, 24);
  auto L = build_labeling(P, crit, separating_saddles(P, crit, 4096));
  return predict(L, make_bgk(mild_relaxation_rate()));
}

}  // namespace

TEST_CASE("small eigenvalues against the dense oracle (coarse tilted well)") {
  // dense eigensolve oracle at nx=120, nHermite=12 confirms count and signs
  auto op = make_op("tilted_double_well", 0.1, 100, 10);
  auto dense = oracles::dense_eigenvalues(op);
  auto sr = small_eigenvalues(op, 4, 1e-10);
  REQUIRE(sr.smallEigs.size() == 4);
  for (int i = 0; i < 4; ++i) {
    CAPTURE(i);
    CHECK(std::abs(sr.smallEigs[i] - dense[i]) <=
          1e-7 * std::max(1e-8, std::abs(dense[i])));
    CHECK(sr.residuals[i] <= 1e-10 * sr.opNorm);
  }
  // one ~0, one real positive small, rest separated
  CHECK(std::abs(sr.smallEigs[0]) <= 1e-11 * sr.opNorm);
  CHECK(sr.smallEigs[1].real() > 0);
  CHECK(std::abs(sr.smallEigs[1].imag()) <= 1e-12);
}

TEST_CASE("tilted double well h=0.1 at spec resolution: 2 small eigenvalues") {
  auto op = make_op("tilted_double_well", 0.1, 400, 30);
  auto sr = small_eigenvalues(op, 4, 1e-10);
  CHECK(std::abs(sr.smallEigs[0]) <= 1e-11 * sr.opNorm);
  CHECK(sr.smallEigs[1].real() > 0);
  // cluster boundary: next eigenvalue sits at the h-scale, far above h^2
  const double h = 0.1;
  CHECK(sr.smallEigs[1].real() < h * h);
  CHECK(sr.smallEigs[2].real() > h / 4);
  // kernel simplicity: 1e4 separation
  CHECK(std::abs(sr.smallEigs[1]) / std::max(1e-300, std::abs(sr.smallEigs[0])) > 1e4);
}

TEST_CASE("triple well: three small eigenvalues with two scales") {
  // h = 0.14 keeps the outer-well eigenvalue above the coarse dense oracle's
  // discretization floor
  auto op = make_op("triple_well", 0.14, 300, 20);
  auto sr = small_eigenvalues(op, 5, 1e-10);
  auto dense = oracles::dense_eigenvalues(make_op("triple_well", 0.14, 100, 8));
  // counts and signs from the dense oracle
  CHECK(std::abs(dense[0]) < 1e-9);
  CHECK(dense[1].real() > 0);
  CHECK(dense[2].real() > 0);
  CHECK(dense[3].real() > 50 * dense[2].real());  // cluster boundary
  CHECK(std::abs(sr.smallEigs[0]) <= 1e-11 * sr.opNorm);
  CHECK(sr.smallEigs[1].real() > 0);
  CHECK(sr.smallEigs[2].real() > 0);
  // distinct magnitude scales e^{-2S/h}
  CHECK(sr.smallEigs[2].real() / sr.smallEigs[1].real() > 100.0);
  // conjugate-pair closure
  for (const auto& l : sr.smallEigs)
    if (std::abs(l.imag()) > 1e-12 * std::abs(l)) {
      bool found = false;
      for (const auto& m : sr.smallEigs)
        found = found || std::abs(m - std::conj(l)) < 1e-10 * std::abs(l);
      CHECK(found);
    }
}

TEST_CASE("match_predictions pairs by magnitude and flags bands") {
  auto op = make_op("tilted_double_well", 0.05, 400, 30);
  auto sr = small_eigenvalues(op, 3, 1e-10);
  auto preds = predictions_for("tilted_double_well");
  auto rows = match_predictions(sr, preds, 0.05, 0.25);
  REQUIRE(rows.size() == 1);
  CHECK(std::abs(rows[0].ratio - 1.0) <= 0.25);
  CHECK_FALSE(rows[0].flagged);
  // kernel row excluded by construction: rows pair nonzero eigenvalues only
  CHECK(rows[0].lambda_num.real() > 0);
  // count mismatch surfaces
  SpectralResult tiny;
  tiny.smallEigs = {0.0};
  CHECK_THROWS_AS(match_predictions(tiny, preds, 0.05, 0.25), CountMismatch);
}

TEST_CASE("triple well: pairing follows the magnitude/S ordering") {
  auto op = make_op("triple_well", 0.1, 300, 20);
  auto sr = small_eigenvalues(op, 4, 1e-10);
  auto preds = predictions_for("triple_well");
  REQUIRE(preds.size() == 2);
  CHECK(preds[0].S > preds[1].S);  // sorted by S descending
  auto rows = match_predictions(sr, preds, 0.1, 10.0);
  REQUIRE(rows.size() == 2);
  // smallest nonzero eigenvalue pairs with the largest S
  CHECK(std::abs(rows[0].lambda_num) < std::abs(rows[1].lambda_num));
  CHECK(rows[0].lambda_ek < rows[1].lambda_ek);
  for (const auto& r : rows) CHECK(r.ratio > 0);
}

TEST_CASE("EK ratio trend |ratio - 1| decreasing in h (criterion-3 shape)") {
  auto preds = predictions_for("tilted_double_well");
  double prev = 1e9;
  for (double h : {0.2, 0.1, 0.05}) {
    auto op = make_op("tilted_double_well", h, 400, 30);
    auto sr = small_eigenvalues(op, 3, 1e-10);
    auto rows = match_predictions(sr, preds, h, 10.0);
    const double dev = std::abs(rows[0].ratio - 1.0);
    CAPTURE(h);
    CHECK(dev < prev);
    prev = dev;
  }
  CHECK(prev <= 0.25);
}

TEST_CASE("resolvent probe: h^2-scaled bound stable across the sweep") {
  // desk-scale oracle check at coarse resolution plus the sweep-stability claim
  std::vector<double> maxima;
  for (double h : {0.2, 0.1, 0.05}) {
    auto op = make_op("wide_double_well", h, 240, 16);
    const double c = 0.25 / (1 + h);
    auto probes = resolvent_probe(op, h, c, 0.5 * c, 6);
    double mx = 0;
    for (auto& [z, b] : probes) mx = std::max(mx, h * h * b);
    maxima.push_back(mx);
  }
  const double lo = *std::min_element(maxima.begin(), maxima.end());
  const double hi = *std::max_element(maxima.begin(), maxima.end());
  CHECK(hi / lo <= 3.0);
}

TEST_CASE("resolvent probe agrees with the dense SVD oracle") {
  auto op = make_op("wide_double_well", 0.2, 90, 8);
  const double c = 0.25 / 1.2;
  auto probes = resolvent_probe(op, 0.2, c, 0.5 * c, 4);
  for (size_t i = 0; i < 3; ++i) {
    const auto& [z, bound] = probes[i];
    const double smin = oracles::dense_smin(op, z);
    CHECK(bound == doctest::Approx(1.0 / smin).epsilon(5e-2));
  }
  // z real negative: finite bound (left half plane resolvent exists)
  auto op2 = make_op("wide_double_well", 0.2, 90, 8);
  CVec w = op2.solve_shifted({-0.04, 0.0}, CVec::Ones(op2.size()));
  CHECK(w.allFinite());
}
