#pragma once

#include <stdexcept>
#include <string>

namespace heatsrc {

/// Invalid user-supplied parameters (config file, CLI flags, API arguments).
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A point or value outside the region where an operation is defined.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A numerical routine failed (factorization, NaN in a solver, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace heatsrc
