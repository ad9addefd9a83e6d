#pragma once

#include <stdexcept>
#include <string>

namespace ergolab {

// Base error with a machine-readable name. ValidationError maps to CLI exit
// code 2, NumericalError to exit code 3.
class Error : public std::runtime_error {
public:
  Error(std::string name, const std::string& msg)
      : std::runtime_error(name + ": " + msg), name_(std::move(name)) {}
  const std::string& name() const { return name_; }

private:
  std::string name_;
};

class ValidationError : public Error {
public:
  using Error::Error;
};

class NumericalError : public Error {
public:
  using Error::Error;
};

#define ERGOLAB_ERROR(NAME, BASE)                                             \
  class NAME : public BASE {                                                  \
  public:                                                                     \
    explicit NAME(const std::string& msg) : BASE(#NAME, msg) {}               \
  }

ERGOLAB_ERROR(InvalidWeights, ValidationError);
ERGOLAB_ERROR(DegenerateRotation, ValidationError);
ERGOLAB_ERROR(BadTwistPair, ValidationError);
ERGOLAB_ERROR(FrameMismatch, ValidationError);
ERGOLAB_ERROR(DegeneratePlane, ValidationError);
ERGOLAB_ERROR(InsufficientSamples, ValidationError);
ERGOLAB_ERROR(ResolutionTooLow, ValidationError);
ERGOLAB_ERROR(GridTooCoarse, ValidationError);
ERGOLAB_ERROR(QuadratureTooCoarse, ValidationError);
ERGOLAB_ERROR(UnknownKey, ValidationError);
ERGOLAB_ERROR(ParseError, ValidationError);
ERGOLAB_ERROR(InvalidConfig, ValidationError);

ERGOLAB_ERROR(NumericalBreakdown, NumericalError);
ERGOLAB_ERROR(SingularMap, NumericalError);
ERGOLAB_ERROR(FormMismatch, NumericalError);
ERGOLAB_ERROR(NoConvergence, NumericalError);
ERGOLAB_ERROR(BlockSingular, NumericalError);
ERGOLAB_ERROR(SignFlip, NumericalError);
ERGOLAB_ERROR(RejectionOverflow, NumericalError);
ERGOLAB_ERROR(NewtonDivergence, NumericalError);
ERGOLAB_ERROR(NonSummableTail, NumericalError);
ERGOLAB_ERROR(NoBracket, NumericalError);

#undef ERGOLAB_ERROR

inline constexpr const char* kVersion = "0.1.0";

} // namespace ergolab
