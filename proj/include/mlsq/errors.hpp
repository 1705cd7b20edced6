#pragma once

#include <stdexcept>

namespace mlsq {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller broke a documented precondition (dimension mismatch, bad range, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

// Input matrix is numerically rank deficient where full column rank is required.
class SingularityError : public Error {
 public:
  using Error::Error;
};

// An iterative kernel failed to converge or produced non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// The iterate error exceeded the divergence guard during a solver run.
class DivergenceError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

// Invalid configuration (schedule, experiment spec, config file).
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace mlsq
