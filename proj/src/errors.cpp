#include "goalqvi/errors.hpp"

namespace goalqvi {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NonIncreasingDeadlines: return "NonIncreasingDeadlines";
    case ErrorCode::NonPositiveTarget: return "NonPositiveTarget";
    case ErrorCode::NonPositiveWeight: return "NonPositiveWeight";
    case ErrorCode::MisalignedStep: return "MisalignedStep";
    case ErrorCode::OutOfDomain: return "OutOfDomain";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::PenaltyNonConvergence: return "PenaltyNonConvergence";
    case ErrorCode::CflViolation: return "CFLViolation";
    case ErrorCode::UnknownTimeLevel: return "UnknownTimeLevel";
    case ErrorCode::IncompatiblePolicy: return "IncompatiblePolicy";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace goalqvi
