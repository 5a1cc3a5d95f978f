#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chiral {

/// Invalid physical or numerical parameter supplied by the caller.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Shape mismatch between matrices or subsystem layouts.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A solver failed to reach its accuracy contract.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The Liouvillian kernel is more than one-dimensional.
class DegenerateSteadyStateError : public NumericalError {
 public:
  DegenerateSteadyStateError(std::size_t kernel_dim, double second_singular)
      : NumericalError("degenerate steady state: kernel dimension " +
                       std::to_string(kernel_dim) +
                       " (second smallest singular value " +
                       std::to_string(second_singular) + ")"),
        kernel_dimension(kernel_dim) {}

  std::size_t kernel_dimension;
};

/// Formula evaluated outside the regime where it is defined.
class RegimeError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace chiral
