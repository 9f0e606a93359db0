#pragma once

#include <stdexcept>
#include <string>

namespace cppl {

// Bad shapes, out-of-range indices, malformed rankings.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// An operation was called on an object that is not ready for it (e.g. t = 0).
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Argument outside the mathematical domain of a bound or formula.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericOverflow : public NumericError {
 public:
  using NumericError::NumericError;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when an environment is asked for more rounds than it can serve.
class ExhaustedEnvironment : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace cppl
