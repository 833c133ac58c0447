#pragma once
#include <stdexcept>
#include <string>

namespace tandem {

/// Raised for invalid or inconsistent parameters (CLI exit code 2).
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Raised when a valid configuration cannot be executed (CLI exit code 3).
class RuntimeError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace tandem
