#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace goalqvi {

enum class ErrorCode {
  InvalidArgument,
  NonIncreasingDeadlines,
  NonPositiveTarget,
  NonPositiveWeight,
  MisalignedStep,
  OutOfDomain,
  NonConvergence,
  PenaltyNonConvergence,
  CflViolation,
  UnknownTimeLevel,
  IncompatiblePolicy,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library-wide exception. The code lets callers (the CLI in particular)
/// map failures onto exit statuses without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace goalqvi
