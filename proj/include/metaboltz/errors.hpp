#pragma once

#include <stdexcept>
#include <string>

namespace metaboltz {

/// Base class for all toolkit errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define METABOLTZ_DEFINE_ERROR(Name)                              \
  class Name : public Error {                                    \
   public:                                                        \
    explicit Name(const std::string& msg) : Error(#Name ": " + msg) {} \
  }

// landscape
METABOLTZ_DEFINE_ERROR(DegenerateCritical);
METABOLTZ_DEFINE_ERROR(NoMinima);
METABOLTZ_DEFINE_ERROR(ResolutionTooCoarse);
METABOLTZ_DEFINE_ERROR(TieBreak);
METABOLTZ_DEFINE_ERROR(HypothesisJVideViolated);
METABOLTZ_DEFINE_ERROR(MismatchDetected);

// collision
METABOLTZ_DEFINE_ERROR(MatrixKindUnsupported);

// saddledyn
METABOLTZ_DEFINE_ERROR(ImaginaryAxisSpectrum);
METABOLTZ_DEFINE_ERROR(NotAGraph);
METABOLTZ_DEFINE_ERROR(MultipleNonpositiveEigenvalues);
METABOLTZ_DEFINE_ERROR(ComplexLeftmostEigenvalue);

// ekformula
METABOLTZ_DEFINE_ERROR(AmbiguousLambdaStar);

// discretization
METABOLTZ_DEFINE_ERROR(WindowTooSmall);
METABOLTZ_DEFINE_ERROR(TailMass);
METABOLTZ_DEFINE_ERROR(SingularShift);

// spectrum
METABOLTZ_DEFINE_ERROR(NotConverged);
METABOLTZ_DEFINE_ERROR(CountMismatch);

// quasimode
METABOLTZ_DEFINE_ERROR(CollarOverlap);
METABOLTZ_DEFINE_ERROR(GridTooCoarse);

// semigroup
METABOLTZ_DEFINE_ERROR(SolverFailure);
METABOLTZ_DEFINE_ERROR(InsufficientWindow);
METABOLTZ_DEFINE_ERROR(NoPlateauDetected);

// cli
METABOLTZ_DEFINE_ERROR(ConfigError);
METABOLTZ_DEFINE_ERROR(ShapeMismatch);

#undef METABOLTZ_DEFINE_ERROR

}  // namespace metaboltz
