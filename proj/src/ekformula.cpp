#include "metaboltz/ekformula.hpp"

#include <cmath>
#include <numbers>

#include "metaboltz/errors.hpp"

namespace metaboltz {

double EKPrediction::lambda(double h) const {
  return h * std::exp(-2 * S / h) * std::sqrt(detHessM) / (2 * std::numbers::pi) *
         prefactorLeading;
}

EKPrediction predict_single(const CriticalPoint& minimum, double S,
                            const std::vector<SaddleData>& saddles) {
  EKPrediction p;
  p.minimum = minimum;
  p.S = S;
  p.arrhenius = 2 * S;
  p.detHessM = minimum.hessian.determinant();
  p.prefactorLeading = 0;
  for (const auto& sd : saddles) {
    SaddlePrefactor sp = phi_eigenproblem(sd);
    p.prefactorLeading += sp.alpha0 / std::sqrt(std::abs(sd.hessV.determinant()));
    p.saddleTerms.push_back(std::move(sp));
  }
  return p;
}

std::vector<EKPrediction> predict(const Labeling& L, const CollisionModel& model) {
  std::vector<EKPrediction> out;
  for (const auto& e : L.minima) {
    if (e.rank_k == 1) continue;  // global minimum: no prediction
    std::vector<SaddleData> sds;
    for (const auto& s : e.saddles) {
      try {
        sds.push_back(SaddleData::from(s, model));
      } catch (const Error& err) {
        throw Error(std::string(err.what()) + " (minimum at " +
                    std::to_string(e.minimum.location[0]) + ")");
      }
    }
    out.push_back(predict_single(e.minimum, e.S, sds));
  }
  std::sort(out.begin(), out.end(), [](const EKPrediction& a, const EKPrediction& b) {
    return a.S > b.S;
  });
  return out;
}

const EKPrediction& select_lambda_star(const std::vector<EKPrediction>& predictions) {
  if (predictions.empty()) throw AmbiguousLambdaStar("no predictions");
  const EKPrediction* best = &predictions.front();
  auto key2 = [](const EKPrediction& p) {
    return p.prefactorLeading * std::sqrt(p.detHessM);
  };
  for (const auto& p : predictions) {
    if (p.S > best->S)
      best = &p;
    else if (p.S == best->S && &p != best && key2(p) < key2(*best))
      best = &p;
  }
  for (const auto& p : predictions) {
    if (&p == best) continue;
    if (p.S == best->S && key2(p) == key2(*best))
      throw AmbiguousLambdaStar("two predictions tie in S and prefactor");
  }
  return *best;
}

}  // namespace metaboltz
