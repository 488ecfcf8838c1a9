#pragma once

#include <stdexcept>
#include <string>

namespace pclqr {

/// Base class for all library errors.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad configuration documents, dimension mismatches,
/// indefinite weights. The message names the offending field.
class InputError : public Error {
 public:
  using Error::Error;
};

/// Argument outside its mathematical domain (e.g. |delta| > 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A trajectory or iteration left the representable range.
class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int step) : Error(what), step_(step) {}
  int step() const { return step_; }

 private:
  int step_;
};

/// A solver precondition on stability was violated (spectral radius >= 1).
class InstabilityError : public Error {
 public:
  using Error::Error;
};

/// The Riccati-based synthesis has no stabilizing solution at this order.
class SynthesisInfeasible : public Error {
 public:
  using Error::Error;
};

}  // namespace pclqr
