#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace wegnerflow {

enum class ErrorCode {
  NotHermitian,
  NonFinite,
  DimMismatch,
  IndexOverflow,
  NoSuchBand,
  IntegratorFailure,
  UnitarityDrift,
  TooFewSamples,
  RouteMismatch,
  NonUnitaryFamily,
  DegenerateMetric,
  StationaryCurve,
  ConditionViolated,
  SpecViolation,
  SingularShift,
  CoordinateOutOfDomain,
  TruncationTooSmall,
  NotInFamily,
  InvalidArgument,
  Io,
};

std::string_view to_string(ErrorCode code);

// All library failures are reported through this exception. The message
// names the violated invariant; code() lets callers branch without parsing it.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace wegnerflow
