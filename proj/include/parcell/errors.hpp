#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace parcell {

enum class ErrorCode {
  InvalidArgument,
  SingularA22,
  ImpulseUnobservable,
  VoltageMismatch,
  CycleGap,
  NonFinite,
  DerivativeUnavailable,
  OrderTooHigh,
  UnsupportedN,
  EigSolverFailure,
  SingularG22,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

/// Single exception type for the library; the code distinguishes the failure
/// classes so callers (and the CLI exit-code mapping) can branch on them.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace parcell
