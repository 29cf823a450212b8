#pragma once

#include <stdexcept>
#include <string>

namespace sdca {

// Bad or malformed input data (files, labels, dimensions).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// A numeric routine failed to meet its residual contract or diverged.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Inconsistent run configuration (flag combinations, invalid parameters).
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sdca
