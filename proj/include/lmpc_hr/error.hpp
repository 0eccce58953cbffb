#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lmpc_hr {

enum class ErrorCode {
  InvalidProblem,
  CyclingGuardExceeded,
  UnboundedSet,
  InfeasibleAnchor,
  MaxIterations,
  InfeasibleInit,
  UnboundedStateSet,
  ResampleCapExceeded,
  DimensionTooHigh,
  InsufficientSamples,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidProblem: return "INVALID_PROBLEM";
    case ErrorCode::CyclingGuardExceeded: return "CYCLING_GUARD_EXCEEDED";
    case ErrorCode::UnboundedSet: return "UNBOUNDED_SET";
    case ErrorCode::InfeasibleAnchor: return "INFEASIBLE_ANCHOR";
    case ErrorCode::MaxIterations: return "MAX_ITERATIONS";
    case ErrorCode::InfeasibleInit: return "INFEASIBLE_INIT";
    case ErrorCode::UnboundedStateSet: return "UNBOUNDED_STATE_SET";
    case ErrorCode::ResampleCapExceeded: return "RESAMPLE_CAP_EXCEEDED";
    case ErrorCode::DimensionTooHigh: return "DIMENSION_TOO_HIGH";
    case ErrorCode::InsufficientSamples: return "INSUFFICIENT_SAMPLES";
  }
  return "UNKNOWN";
}

/// Every failure raised by the library carries one of the codes above; the
/// CLI maps the code name onto its diagnostic stream.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& detail)
      : std::runtime_error(std::string(to_string(code)) + ": " + detail), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace lmpc_hr
