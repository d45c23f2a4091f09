#pragma once

#include <stdexcept>
#include <string>

namespace xcav {

/// Base class for every error the library throws.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or out-of-range input (config files, stack parameters).
/// `field` names the offending key when one is known.
class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what, std::string field = {})
      : Error(what), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

private:
  std::string field_;
};

/// A precondition of an operation was violated by the caller.
class ContractError : public Error {
public:
  using Error::Error;
};

/// Argument outside the domain an evaluator is defined on.
class DomainError : public Error {
public:
  using Error::Error;
};

/// Lookup of a name that is not registered.
class LookupError : public Error {
public:
  using Error::Error;
};

/// Numerical failure (non-convergence, singular systems).
class NumericError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace xcav
