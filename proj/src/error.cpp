#include "condrdf/error.hpp"

namespace condrdf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::DimensionMismatch: return "dimension_mismatch";
    case ErrorCode::NotSymmetric: return "not_symmetric";
    case ErrorCode::NotPSD: return "not_psd";
    case ErrorCode::SingularY: return "singular_y";
    case ErrorCode::NotNested: return "not_nested";
    case ErrorCode::InfeasibleSigma: return "infeasible_sigma";
    case ErrorCode::NegativeNoise: return "negative_noise";
    case ErrorCode::SingularCross: return "singular_cross";
    case ErrorCode::HypothesisViolated: return "hypothesis_violated";
    case ErrorCode::BelowRange: return "below_range";
    case ErrorCode::NotConverged: return "not_converged";
    case ErrorCode::DimensionUnsupported: return "dimension_unsupported";
    case ErrorCode::ResolutionTooCoarse: return "resolution_too_coarse";
    case ErrorCode::ParseError: return "parse_error";
  }
  return "unknown";
}

}  // namespace condrdf
