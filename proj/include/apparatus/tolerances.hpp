#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace apparatus {

/// Numerical thresholds shared by every module. Set once at startup (before
/// any worker threads are launched) and read everywhere else.
struct Tolerances {
  double algebraic = 1e-12;      // exact identities: norms, hermiticity, traces
  double physics = 1e-10;        // physics assertions, orthonormality
  double psd_floor = -1e-10;     // smallest admissible density eigenvalue
  double schmidt_cutoff = 1e-12; // c_gamma below this is dropped
  double degeneracy = 1e-9;      // |c_i - c_j| flagged as degenerate
  double quadrature = 1e-3;      // Husimi normalization on covering grids
  std::size_t max_composite_dim = 8192;
};

inline Tolerances& tolerances() {
  static Tolerances instance;
  return instance;
}

/// Base for every error raised by the library. The CLI maps subclasses to
/// exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

/// A request that would exceed the desk-scale resource cap.
class ResourceCapError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace apparatus
