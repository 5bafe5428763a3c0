#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wulffkit {

enum class ErrorCode {
  zero_vector,
  invalid_body,
  invalid_argument,
  not_orthogonal,
  degenerate_metric,
  not_closed,
  not_on_boundary,
  immersion_lost,
  mode_unsupported,
  not_stationary,
  zero_volume_velocity,
  empty_intersection,
  optimizer_diverged,
  no_feasible_candidate,
  insufficient_samples,
  schema_error,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::zero_vector: return "ZeroVector";
    case ErrorCode::invalid_body: return "InvalidBody";
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::not_orthogonal: return "NotOrthogonal";
    case ErrorCode::degenerate_metric: return "DegenerateMetric";
    case ErrorCode::not_closed: return "NotClosed";
    case ErrorCode::not_on_boundary: return "NotOnBoundary";
    case ErrorCode::immersion_lost: return "ImmersionLost";
    case ErrorCode::mode_unsupported: return "ModeUnsupported";
    case ErrorCode::not_stationary: return "NotStationary";
    case ErrorCode::zero_volume_velocity: return "ZeroVolumeVelocity";
    case ErrorCode::empty_intersection: return "EmptyIntersection";
    case ErrorCode::optimizer_diverged: return "OptimizerDiverged";
    case ErrorCode::no_feasible_candidate: return "NoFeasibleCandidate";
    case ErrorCode::insufficient_samples: return "InsufficientSamples";
    case ErrorCode::schema_error: return "SchemaError";
  }
  return "Unknown";
}

/// Every failure raised by the toolkit carries one of the codes above so that
/// callers (and the CLI exit-code mapping) can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace wulffkit
