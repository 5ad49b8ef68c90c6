#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lurerad {

// Values mirror lurerad_status in lurerad.h; keep them in sync.
enum class ErrorCode {
  kOk = 0,
  kInvalidArgument = 1,
  kDimensionMismatch = 2,
  kNonSquare = 3,
  kNonFinite = 4,
  kSingular = 5,
  kNoConvergence = 6,
  kNotMetzler = 7,
  kNotHurwitz = 8,
  kNotMetzlerUpper = 9,
  kCertificationFailed = 10,
  kMissingSchurScale = 11,
  kZeroSpectralRadius = 12,
  kInfiniteRadius = 13,
  kOrderViolated = 14,
  kNonzeroBias = 15,
  kMixedActivations = 16,
  kNotSiso = 17,
  kNonFiniteState = 18,
  kZeroInitialState = 19,
  kNoInstabilityFound = 20,
  kUnstableAtZero = 21,
  kParseError = 22,
  kIoError = 23,
};

std::string_view ErrorCodeName(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lurerad
