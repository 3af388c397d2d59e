#pragma once

#include <stdexcept>
#include <string>

namespace proact {

/// Invalid configuration value or unknown key.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Interaction-protocol misuse, e.g. stepping a finished episode.
class ProtocolError : public std::logic_error {
 public:
  explicit ProtocolError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace proact
