#pragma once

#include <stdexcept>
#include <string>

namespace dcdgan {

// Exit-code mapping used by the CLI: ConfigError/ShapeError/ValidationError -> 2,
// DivergenceError -> 3, IoError/CorruptionError -> 4.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ShapeError : ConfigError {
  using ConfigError::ConfigError;
};

struct ValidationError : ConfigError {
  using ConfigError::ConfigError;
};

struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CorruptionError : IoError {
  using IoError::IoError;
};

}  // namespace dcdgan
