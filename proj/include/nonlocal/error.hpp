#pragma once

#include <stdexcept>
#include <string>

namespace nonlocal {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-domain user input (zero denominators, unordered times, ...).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition, e.g. passed irrational times to the reduction.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain of a map (u = 0 for the inverse substitution).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// exp() would overflow double precision.
class SaturationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure did not reach its tolerance.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, double achieved)
      : Error(what), achieved_(achieved) {}

  double achieved() const noexcept { return achieved_; }

 private:
  double achieved_;
};

/// Dimension mismatch between matrices, states and sources.
class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace nonlocal
