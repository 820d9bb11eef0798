#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace iphs {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A vector or matrix had the wrong length for the model it was passed to.
class DimensionError : public Error {
 public:
  DimensionError(std::string what_dim, std::size_t expected, std::size_t actual)
      : Error(what_dim + ": expected length " + std::to_string(expected) + ", got " +
              std::to_string(actual)),
        dimension(std::move(what_dim)),
        expected(expected),
        actual(actual) {}

  std::string dimension;
  std::size_t expected;
  std::size_t actual;
};

/// A computation produced a non-finite or out-of-domain value.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg, std::vector<double> state = {})
      : Error(msg), state(std::move(state)) {}

  /// State that produced the failure, when one is known.
  std::vector<double> state;
};

/// Raised when an operation needs a capability (Hamiltonian, entropy rate)
/// the model does not provide.
class CapabilityError : public Error {
 public:
  using Error::Error;
};

/// Malformed text input (CSV, config, checkpoint). `line` is 1-based, 0 if unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t line = 0)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg), line(line) {}

  std::size_t line;
};

/// A physics invariant was violated by a model or its parameters.
class PhysicsViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace iphs
