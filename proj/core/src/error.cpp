#include "semopt/error.hpp"

namespace semopt {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidArgument:
      return "invalid-argument";
    case ErrorKind::UnsupportedConfiguration:
      return "unsupported-configuration";
    case ErrorKind::NumericFailure:
      return "numeric-failure";
    case ErrorKind::StepFailure:
      return "step-failure";
    case ErrorKind::CheckpointMiss:
      return "checkpoint-miss";
    case ErrorKind::ScheduleInvalid:
      return "schedule-invalid";
    case ErrorKind::LineSearchFailure:
      return "line-search-failure";
    case ErrorKind::EvaluationFailure:
      return "evaluation-failure";
    case ErrorKind::Io:
      return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

StepFailure::StepFailure(const std::string& what, int newton_iterations, int krylov_iterations,
                         double residual)
    : Error(ErrorKind::StepFailure, what),
      newton_iterations_(newton_iterations),
      krylov_iterations_(krylov_iterations),
      residual_(residual) {}

ScheduleError::ScheduleError(const std::string& what, std::size_t action_index)
    : Error(ErrorKind::ScheduleInvalid, what + " (action " + std::to_string(action_index) + ")"),
      action_index_(action_index) {}

void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace semopt
