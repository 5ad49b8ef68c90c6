#include "lurerad/error.h"

namespace lurerad {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOk: return "Ok";
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kDimensionMismatch: return "DimensionMismatch";
    case ErrorCode::kNonSquare: return "NonSquare";
    case ErrorCode::kNonFinite: return "NonFinite";
    case ErrorCode::kSingular: return "Singular";
    case ErrorCode::kNoConvergence: return "NoConvergence";
    case ErrorCode::kNotMetzler: return "NotMetzler";
    case ErrorCode::kNotHurwitz: return "NotHurwitz";
    case ErrorCode::kNotMetzlerUpper: return "NotMetzlerUpper";
    case ErrorCode::kCertificationFailed: return "CertificationFailed";
    case ErrorCode::kMissingSchurScale: return "MissingSchurScale";
    case ErrorCode::kZeroSpectralRadius: return "ZeroSpectralRadius";
    case ErrorCode::kInfiniteRadius: return "InfiniteRadius";
    case ErrorCode::kOrderViolated: return "OrderViolated";
    case ErrorCode::kNonzeroBias: return "NonzeroBias";
    case ErrorCode::kMixedActivations: return "MixedActivations";
    case ErrorCode::kNotSiso: return "NotSiso";
    case ErrorCode::kNonFiniteState: return "NonFiniteState";
    case ErrorCode::kZeroInitialState: return "ZeroInitialState";
    case ErrorCode::kNoInstabilityFound: return "NoInstabilityFound";
    case ErrorCode::kUnstableAtZero: return "UnstableAtZero";
    case ErrorCode::kParseError: return "ParseError";
    case ErrorCode::kIoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace lurerad
