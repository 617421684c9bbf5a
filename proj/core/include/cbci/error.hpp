#pragma once

#include <stdexcept>
#include <string>

namespace cbci {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Invalid input: violated precondition or malformed measure/quadruplet.
class DomainError : public Error {
  public:
    using Error::Error;
};

/// A numerical routine failed (solver residual, root bracketing, inversion).
class NumericError : public Error {
  public:
    using Error::Error;
};

/// Quadrature could neither prove convergence nor divergence.
class InconclusiveError : public NumericError {
  public:
    using NumericError::NumericError;
};

/// An internal identity or cross-check was violated beyond tolerance.
class InvariantError : public Error {
  public:
    using Error::Error;
};

}  // namespace cbci
