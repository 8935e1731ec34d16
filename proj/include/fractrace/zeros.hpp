#pragma once

#include <cstddef>
#include <limits>
#include <vector>

#include "fractrace/scalar_ml.hpp"

namespace fractrace {

/// Axis-aligned rectangle in the complex plane.
struct SearchRegion {
  double re_min = 0.0;
  double re_max = 0.0;
  double im_min = 0.0;
  double im_max = 0.0;

  void validate() const;
  bool contains(Complex z) const {
    return z.real() >= re_min && z.real() <= re_max && z.imag() >= im_min && z.imag() <= im_max;
  }
};

/// A located zero of E_{alpha,beta}.
struct MLZero {
  MLParams params;
  Complex location;
  double residual = 0.0;  // |E_{alpha,beta}(location)|
  int index = 0;          // 1-based rank by modulus; conjugates share an index
  int multiplicity = 1;   // > 1 only when a cluster could not be separated
};

/// Radius of the punctured disk around the origin excluded from beta = 0
/// searches (E_{alpha,0} always has a trivial zero there).
inline constexpr double kOriginExclusion = 1e-3;

/// Argument-principle count of zeros inside the rectangle. For beta = 0 the
/// trivial zero at the origin is not counted.
///
/// Throws BoundaryZeroError when |E| <= 1e-12 on the boundary even after five
/// small outward perturbations of the rectangle.
int count_zeros(const MLParams& p, const SearchRegion& region);

/// All zeros inside the rectangle (up to max_count), found by quadrisection
/// down to single-zero cells and Newton refinement from each cell. Sorted by
/// modulus, then imaginary part descending.
std::vector<MLZero> find_zeros(const MLParams& p, const SearchRegion& region,
                               std::size_t max_count = std::numeric_limits<std::size_t>::max());

/// Newton refinement from a seed near a zero. Throws ConvergenceError if the
/// iteration does not settle with |E| <= 1e-8 (tried from 8 perturbed seeds).
MLZero refine_zero(const MLParams& p, Complex seed);

/// Zeros with 0 < |z| <= radius (origin excluded for beta = 0).
std::vector<MLZero> zeros_in_disk(const MLParams& p, double radius);

/// Zeros inside the thin sector |arg z - angle| <= half_width, |z| <= radius.
/// The search region used by dynamics to test whether a ray carries zeros.
std::vector<MLZero> zeros_near_ray(const MLParams& p, double angle, double half_width,
                                   double radius);

/// Assign 1-based indices (conjugate pairs share one) after sorting.
void sort_and_index(std::vector<MLZero>& zeros);

}  // namespace fractrace
