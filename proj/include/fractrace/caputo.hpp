#pragma once

#include <vector>

#include <Eigen/Dense>

namespace fractrace {

/// State of a system at time t.
struct TimedState {
  double t = 0.0;
  Eigen::VectorXd x;
};

/// L1 approximation of the Caputo derivative of order alpha at t_1..t_N from
/// samples on the uniform grid t_j = j h (piecewise-linear interpolation of x
/// inside the Caputo integral; O(h^(2-alpha)) for smooth x).
///
/// Throws InvalidParam for alpha outside (0, 1), fewer than two samples or
/// mismatched state lengths; GridError if the grid does not start at 0 or its
/// spacing deviates from uniform by more than 1e-12 relative.
std::vector<TimedState> caputo_l1(const std::vector<TimedState>& samples, double alpha);

}  // namespace fractrace
