#include "bilicut/error.hpp"

namespace bilicut {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNonSymmetric: return "NonSymmetric";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kInvalidParams: return "InvalidParams";
    case ErrorCode::kBoxInverted: return "BoxInverted";
    case ErrorCode::kAsymmetricQ: return "AsymmetricQ";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kNotConvex: return "NotConvex";
    case ErrorCode::kBoundInverted: return "BoundInverted";
    case ErrorCode::kNumericalFailure: return "NumericalFailure";
    case ErrorCode::kDegenerateInterval: return "DegenerateInterval";
    case ErrorCode::kCglpNumericalFailure: return "CglpNumericalFailure";
    case ErrorCode::kPsdViolated: return "PsdViolated";
    case ErrorCode::kMissingColumns: return "MissingColumns";
    case ErrorCode::kUnknownBackend: return "UnknownBackend";
  }
  return "Unknown";
}

}  // namespace bilicut
