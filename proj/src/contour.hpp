#pragma once

#include <array>
#include <complex>
#include <functional>
#include <stdexcept>
#include <vector>

namespace fractrace::detail {

using Cplx = std::complex<double>;
using AnalyticFn = std::function<Cplx(Cplx)>;

/// Boundary piece parametrized by one coordinate c running from c0 to c1:
/// x on a horizontal segment, y on a vertical one, the modulus on a radial
/// segment, the angle on an arc. Points are a pure function of c, so two
/// edges over the same line produce bit-identical samples.
struct Edge {
  enum class Kind { horizontal, vertical, radial, arc };

  Kind kind = Kind::horizontal;
  double fixed = 0.0;  // y, x, angle, or radius respectively
  Cplx center;         // arcs only
  double c0 = 0.0, c1 = 0.0;
  bool closed = false;  // full circle: the end point repeats the start

  Cplx at(double c) const;
  /// Arc length per unit of c.
  double scale() const { return kind == Kind::arc ? fixed : 1.0; }
  double length() const { return scale() * std::abs(c1 - c0); }
};

/// Closed cell used by the zero counter: a rectangle, an annular sector around
/// the origin, or a disk.
struct Cell {
  enum class Shape { rect, sector, disk };

  Shape shape = Shape::rect;
  // rect:   [u0,u1] x [v0,v1] in (re, im)
  // sector: r in [u0,u1], arg in [v0,v1]
  // disk:   center (u0, v0), radius u1
  double u0 = 0.0, u1 = 0.0, v0 = 0.0, v1 = 0.0;

  static Cell rect(double re0, double re1, double im0, double im1) {
    return {Shape::rect, re0, re1, im0, im1};
  }
  static Cell sector(double r0, double r1, double th0, double th1) {
    return {Shape::sector, r0, r1, th0, th1};
  }
  static Cell disk(Cplx c, double radius) { return {Shape::disk, c.real(), radius, c.imag(), 0.0}; }

  /// Counter-clockwise boundary.
  std::vector<Edge> boundary() const;
  Cplx center() const;
  Cplx point(double fu, double fv) const;
  double diameter() const;
  bool contains(Cplx z, double slack) const;
  /// Four children cut at fractions (fu, fv) of the two coordinate ranges.
  std::array<Cell, 4> split(double fu, double fv) const;
  /// Grow outward by delta (absolute for rect/disk radius, relative width for sectors).
  Cell expanded(double delta) const;
};

/// Thrown when the sampled function is (numerically) zero on the contour or
/// the phase cannot be resolved within the sampling budget.
struct BoundaryHit : std::runtime_error {
  explicit BoundaryHit(Cplx where_)
      : std::runtime_error("function vanishes on contour"), where(where_) {}
  Cplx where;
};

/// Upper estimate of |d arg f / dz| near z; sets the initial sampling density
/// so that no phase turn can hide between two samples.
using PhaseRate = std::function<double(Cplx)>;

/// Winding number of f around the cell boundary. Each edge is first sampled on
/// a dyadic lattice of its coordinate fine enough for steps of at most 2.8 rad
/// under `rate` (so cells sharing a line share samples), then adaptive
/// bisection keeps consecutive observed phase increments below 1.5 rad.
int winding_number(const AnalyticFn& f, const Cell& cell, const PhaseRate& rate,
                   double zero_floor = 1e-12, int max_samples = 1 << 16);

}  // namespace fractrace::detail
