#pragma once

#include <stdexcept>
#include <string>

namespace aoipg {

/// A learning run hit a condition it cannot recover from (non-finite or
/// exploding update signal, livelocked discard loop).
class AbortError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configuration value failed validation. key() names the offending entry.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::invalid_argument(key + ": " + message), key_(std::move(key)) {}

  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

}  // namespace aoipg
