#pragma once

#include <stdexcept>
#include <string>

namespace illum {

// Base class for all library errors. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor shapes or column counts that do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Out-of-range scalar argument (dropout rate, learning rate, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration: empty mask, empty split, bad model config.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed or unreadable input data (CSV, images, split files).
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite values in activations, gradients or loss.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Filesystem failures.
class IoError : public Error {
 public:
  using Error::Error;
};

// Violated internal invariant (e.g. a tape that references a later node).
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace illum
