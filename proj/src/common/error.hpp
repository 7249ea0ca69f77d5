#pragma once

#include <stdexcept>
#include <string>

namespace wsground {

// Every failure raised by the core derives from Error so the C boundary can
// translate it into a status code with a single catch.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A file is missing, unreadable, or malformed.
class LoadError : public Error {
 public:
  using Error::Error;
};

/// Loaded data violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A configuration field is unknown, mistyped, or out of range.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition (shape mismatch, empty input).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// A requested embedding backend cannot be initialized.
class BackendError : public Error {
 public:
  using Error::Error;
};

/// NaN/Inf reached a loss or gradient.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Training detected a write to a frozen provider.
class FrozenViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace wsground
