#pragma once

#include <stdexcept>
#include <string>

namespace caputo_ms {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Out-of-range model parameters (alpha, varrho, H, lambda, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Argument outside an operation's domain (lag <= 0, off-grid tau, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

class GridError : public Error {
 public:
  using Error::Error;
};

// Quadrature non-convergence, failed factorization.
class NumericError : public Error {
 public:
  using Error::Error;
};

class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Two independent routes to the same quantity disagree.
class ConsistencyError : public NumericError {
 public:
  using NumericError::NumericError;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace caputo_ms
