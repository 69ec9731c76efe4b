#pragma once

#include <stdexcept>
#include <string>

namespace hvinfer {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input data (CSV syntax, shape mismatch).
class InputError : public Error {
 public:
  using Error::Error;
};

/// CSV parse failure. Row and column are 1-based; column 0 means "whole row".
class ParseError : public InputError {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t col)
      : InputError(what), row_(row), col_(col) {}
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

/// Numerical breakdown: NaN, singular node-wise fit, degenerate variance.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or out-of-range parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace hvinfer
