#pragma once

#include <stdexcept>
#include <string>

namespace divels {

/// Malformed arguments or data: dimension mismatches, non-finite entries,
/// out-of-range parameters.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Requested an operation that only exists for finite-rank kernels.
class UnsupportedFamilyError : public InputError {
 public:
  using InputError::InputError;
};

/// A linear solve failed. Carries the condition estimate of the system.
class NumericalError : public std::runtime_error {
 public:
  NumericalError(const std::string& what, double condition_estimate)
      : std::runtime_error(what), condition_estimate_(condition_estimate) {}

  double condition_estimate() const noexcept { return condition_estimate_; }

 private:
  double condition_estimate_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace divels
