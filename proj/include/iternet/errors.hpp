#pragma once

#include <stdexcept>
#include <string>

namespace iternet {

// Bad shapes, bad hyperparameters, unusable option combinations.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Unreadable/corrupt files, malformed records, impossible generation requests.
struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite loss during training.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace iternet
