#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pspace {

/// Configuration file or parameter validation failure (CLI exit code 2).
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// The grid mapping cannot reach the requested endpoint with alpha > 0.
class InfeasibleMapping : public std::runtime_error {
  public:
    explicit InfeasibleMapping(const std::string& msg) : std::runtime_error(msg) {}
};

/// Corrupt, truncated, or version-mismatched binary file (CLI exit code 4).
class FormatError : public std::runtime_error {
  public:
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Cache file does not match the configuration that requests it (CLI exit code 4).
class StaleCache : public std::runtime_error {
  public:
    explicit StaleCache(const std::string& msg) : std::runtime_error(msg) {}
};

/// Iterative numerics failed to converge or produced non-finite values
/// (CLI exit code 3). Carries the offending index (eigenpair or time step).
class NumericalFailure : public std::runtime_error {
  public:
    NumericalFailure(const std::string& msg, std::size_t index)
        : std::runtime_error(msg + " (index " + std::to_string(index) + ")"), index_(index) {}

    std::size_t index() const { return index_; }

  private:
    std::size_t index_;
};

/// Requested a mode the implementation does not support (e.g. m != 0).
class UnsupportedConfiguration : public std::runtime_error {
  public:
    explicit UnsupportedConfiguration(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace pspace
