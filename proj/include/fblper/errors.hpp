#pragma once

#include <stdexcept>
#include <string>

namespace fblper {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// No SNR (or no budget) can realize the requested blocklength.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two distributions defined over different integer grids were combined.
class GridMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent scenario configuration.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace fblper
