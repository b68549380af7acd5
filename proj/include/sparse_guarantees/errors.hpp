#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace sparse_guarantees {

enum class ErrorCode {
  InvalidArgument,
  RankDeficient,
  NoConvergence,
  EmptyInput,
  NotSymmetric,
  NotPowerOfTwo,
  TooFewAtoms,
  EnumerationTooLarge,
  IndexOutOfRange,
  DuplicateIndex,
  NonPositiveGamma,
  NonPositiveSigma,
  Infeasible,
  InvalidSpec,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every domain failure in the library is raised as this type.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

  /// Numerical failures (as opposed to bad input).
  bool is_solver_failure() const noexcept {
    return code_ == ErrorCode::RankDeficient || code_ == ErrorCode::NoConvergence ||
           code_ == ErrorCode::Infeasible;
  }

 private:
  ErrorCode code_;
};

}  // namespace sparse_guarantees
