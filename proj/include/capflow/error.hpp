#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace capflow {

enum class ErrorKind {
  InvalidArgument,
  IoError,
  NotIrreducible,
  NegativeRate,
  SolverFailure,
  NotStationary,
  EmptyTargetSet,
  EmptySet,
  OverlappingSets,
  SupportMismatch,
  InfeasibleInputs,
  SyntaxError,
  UnknownIdentifier,
  DegenerateCritical,
  NotASaddle,
  NotAMinimum,
  NonpositiveBarrier,
  HypothesisViolation,
  WellMergeError,
  NoSaddle,
  EmptyWell,
  HorizonTooShort,
  InsufficientSamples,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above.
///
/// SolverFailure is the only numerical kind; the CLI maps it to exit code 2
/// and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  [[nodiscard]] ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

inline void require(bool condition, ErrorKind kind, const std::string& message) {
  if (!condition) {
    fail(kind, message);
  }
}

}  // namespace capflow
