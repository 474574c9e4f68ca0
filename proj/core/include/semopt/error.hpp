#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semopt {

enum class ErrorKind {
  InvalidArgument,
  UnsupportedConfiguration,
  NumericFailure,
  StepFailure,
  CheckpointMiss,
  ScheduleInvalid,
  LineSearchFailure,
  EvaluationFailure,
  Io,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Raised when a time step cannot be completed (Newton or GMRES did not
/// converge, or the new state is not finite).
class StepFailure : public Error {
 public:
  StepFailure(const std::string& what, int newton_iterations, int krylov_iterations,
              double residual);
  int newton_iterations() const noexcept { return newton_iterations_; }
  int krylov_iterations() const noexcept { return krylov_iterations_; }
  double residual() const noexcept { return residual_; }

 private:
  int newton_iterations_;
  int krylov_iterations_;
  double residual_;
};

/// Raised by the schedule interpreter; carries the offending action index.
class ScheduleError : public Error {
 public:
  ScheduleError(const std::string& what, std::size_t action_index);
  std::size_t action_index() const noexcept { return action_index_; }

 private:
  std::size_t action_index_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& what);

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorKind::InvalidArgument, what);
}

}  // namespace semopt
