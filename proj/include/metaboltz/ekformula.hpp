#pragma once

#include <vector>

#include "metaboltz/landscape.hpp"
#include "metaboltz/saddledyn.hpp"

namespace metaboltz {

/// Per-minimum asymptotic eigenvalue data
///   lambda(h) = h exp(-2S/h) det(Hess_m V)^{1/2} / (2 pi) * prefactorLeading,
///   prefactorLeading = sum over j(m) of |det Hess_s V|^{-1/2} (M0 nu2 . nu2)(s).
struct EKPrediction {
  CriticalPoint minimum;
  double S = 0;                 // sigma(m) - V(m)/2
  double arrhenius = 0;         // V(s) - V(m) = 2S
  double prefactorLeading = 0;
  double detHessM = 0;
  std::vector<SaddlePrefactor> saddleTerms;

  double lambda(double h) const;
};

/// One prediction per non-global minimum, sorted by S descending.
std::vector<EKPrediction> predict(const Labeling& L, const CollisionModel& model);

/// Prediction from explicit saddle data (used for hand-built landscapes).
EKPrediction predict_single(const CriticalPoint& minimum, double S,
                            const std::vector<SaddleData>& saddles);

/// The slowest prediction: maximal S, ties broken by minimal
/// prefactorLeading * det(Hess_m V)^{1/2}. Throws AmbiguousLambdaStar on exact ties.
const EKPrediction& select_lambda_star(const std::vector<EKPrediction>& predictions);

}  // namespace metaboltz
