#pragma once

#include <stdexcept>
#include <string>

namespace fopkit {

// Base of every error the toolkit throws. The CLI maps each subclass onto a
// distinct exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration value or hyperparameter.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (files, stores, trial lists).
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values during training, or a metric that is undefined for the
// given input.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace fopkit
