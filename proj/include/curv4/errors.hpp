#pragma once

#include <stdexcept>
#include <string>

namespace curv4 {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A finite-difference stencil (or requested box) leaves the chart domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Malformed or out-of-range input (asymmetric matrix, bad parameter, ...).
class InputError : public Error {
 public:
  using Error::Error;
};

/// A quantity that should satisfy an identity does not, beyond tolerance.
class InconsistencyError : public Error {
 public:
  using Error::Error;
};

/// An operation was called on data that violates its stated precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Ric is a multiple of g and W vanishes: no canonical orthonormal frame.
class DegenerateFrameError : public Error {
 public:
  using Error::Error;
};

/// The ODE right-hand side produced a non-finite value.
class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double last_valid_t)
      : Error(what), last_valid_t_(last_valid_t) {}
  double last_valid_t() const noexcept { return last_valid_t_; }

 private:
  double last_valid_t_;
};

}  // namespace curv4
