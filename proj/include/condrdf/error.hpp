#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace condrdf {

enum class ErrorCode {
  InvalidArgument,
  DimensionMismatch,
  NotSymmetric,
  NotPSD,
  SingularY,
  NotNested,
  InfeasibleSigma,
  NegativeNoise,
  SingularCross,
  HypothesisViolated,
  BelowRange,
  NotConverged,
  DimensionUnsupported,
  ResolutionTooCoarse,
  ParseError,
};

std::string_view to_string(ErrorCode code);

/// Structured rejection raised by every library operation.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace condrdf
