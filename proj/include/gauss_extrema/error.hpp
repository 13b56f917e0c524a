#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gauss_extrema {

enum class ErrorCode {
  NotSPD,
  NotPSD,
  DimensionTooLarge,
  DimensionMismatch,
  ResolutionTooCoarse,
  NonPositiveInput,
  EmptyInput,
  BadCheckpoints,
  SizeExceeded,
  LengthMismatch,
  MisalignedGrid,
  BadFunctional,
  TooShort,
  NoConvergence,
  EmptySet,
  TooFewTrials,
  ConfigError,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotSPD: return "NotSPD";
    case ErrorCode::NotPSD: return "NotPSD";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ResolutionTooCoarse: return "ResolutionTooCoarse";
    case ErrorCode::NonPositiveInput: return "NonPositiveInput";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::BadCheckpoints: return "BadCheckpoints";
    case ErrorCode::SizeExceeded: return "SizeExceeded";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::MisalignedGrid: return "MisalignedGrid";
    case ErrorCode::BadFunctional: return "BadFunctional";
    case ErrorCode::TooShort: return "TooShort";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::EmptySet: return "EmptySet";
    case ErrorCode::TooFewTrials: return "TooFewTrials";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool condition, ErrorCode code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace gauss_extrema
