#pragma once

#include <stdexcept>
#include <string>

namespace patk {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Filesystem failure while reading or writing.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unsupported on-disk content.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Violated precondition on an argument (shape, range, geometry).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Configuration that failed validation; the message lists every bad field.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An iterative method produced a non-finite value.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

}  // namespace patk
