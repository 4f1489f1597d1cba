#pragma once

#include <stdexcept>

namespace splinegrad {

/// Shapes or lengths of two arguments disagree.
struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Arguments admit no feasible solution (e.g. more pieces than samples).
struct InfeasibleError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A parameter lies outside its valid range.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// A configuration value is unsupported or out of range.
struct ConfigError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// An iterative method produced a non-finite value.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Non-finite data where finite values are required.
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace splinegrad
