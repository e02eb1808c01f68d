#pragma once

#include <stdexcept>
#include <string>

namespace nvghz {

// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape problems: wrong dimension, site out of range, layout mismatch, cap exceeded.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Physically invalid parameters (delta <= 0, Q <= 0, vanishing denominators, ...).
class PhysicsError : public Error {
 public:
  using Error::Error;
};

// Time integration could not proceed (step underflow, runaway norm).
class PropagationError : public Error {
 public:
  using Error::Error;
};

// Malformed or incomplete run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace nvghz
