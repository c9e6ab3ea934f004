#pragma once

#include <stdexcept>
#include <string>

namespace vilab {

/// Malformed input: bad dimensions, out-of-range parameters, invalid config.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed: divergence, non-convergence, singular solve,
/// rejection budget exhausted.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A measured quantity exceeded the closed-form bound it is checked against.
class BoundViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vilab
