#pragma once

#include <stdexcept>
#include <string>

namespace spectrunc {

/// Invalid user configuration (bad JSON, unknown family, out-of-range parameter).
/// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical operation could not produce a trustworthy result
/// (singular solve, failed residual check). The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a requested Fourier index or truncation would alias on the grid.
class AliasingError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Functions defined on different grids were combined.
class GridMismatch : public std::invalid_argument {
 public:
  explicit GridMismatch(const std::string& what)
      : std::invalid_argument("grid mismatch: " + what) {}
};

}  // namespace spectrunc
