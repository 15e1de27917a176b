#pragma once

#include <stdexcept>
#include <string>

namespace cusp {

// Bad input or a precondition the caller could have checked.
struct DomainError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The computation itself broke down.
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

#define CUSP_ERROR(name, base)      \
  struct name : base {              \
    using base::base;               \
  };

CUSP_ERROR(ChartOverlapError, DomainError)
CUSP_ERROR(AsymptoteParameter, DomainError)
CUSP_ERROR(SeedOnSymmetricAxis, DomainError)
CUSP_ERROR(IntegerResonance, DomainError)

CUSP_ERROR(StepSizeUnderflow, NumericalError)
CUSP_ERROR(NonFiniteState, NumericalError)
CUSP_ERROR(NoReturn, NumericalError)
CUSP_ERROR(TangencyDetected, NumericalError)
CUSP_ERROR(NewtonDiverged, NumericalError)
CUSP_ERROR(CycleCollapsed, NumericalError)
CUSP_ERROR(QuadratureFailure, NumericalError)
CUSP_ERROR(NoRootInBracket, NumericalError)
CUSP_ERROR(EscapeBeforeEntry, NumericalError)

#undef CUSP_ERROR

// c2 outside the span of the averaged curve. `boundary` carries the
// nearest attainable y2 when one exists (y2 = 0 for c2 = 0).
struct OutOfRange : DomainError {
  OutOfRange(const std::string& what, double boundary_y2)
      : DomainError(what), boundary(boundary_y2) {}
  double boundary;
};

}  // namespace cusp
