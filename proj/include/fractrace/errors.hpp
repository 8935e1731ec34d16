#pragma once

#include <stdexcept>
#include <string>

namespace fractrace {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Argument lies outside the documented evaluation domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Parameters violate their invariants (alpha out of range, NaN input, bad shapes).
class InvalidParam : public Error {
 public:
  using Error::Error;
};

/// Sample grid handed to the Caputo quadrature is not uniform.
class GridError : public Error {
 public:
  using Error::Error;
};

/// The function vanishes (numerically) on a contour used for zero counting.
class BoundaryZeroError : public Error {
 public:
  using Error::Error;
};

/// Newton refinement did not reach the residual target.
class ConvergenceError : public Error {
 public:
  using Error::Error;
};

/// Matrix is singular at the scale-aware threshold.
class SingularError : public Error {
 public:
  using Error::Error;
};

/// Eigensolver failed to converge.
class NonConvergence : public Error {
 public:
  using Error::Error;
};

/// Point is not in the image of the solution operator at the requested time.
class NotReachable : public Error {
 public:
  using Error::Error;
};

}  // namespace fractrace
