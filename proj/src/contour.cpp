#include "contour.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace fractrace::detail {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kMaxPhaseStep = 1.5;  // below pi/2
// Initial spacing in rad under the rate estimate. An observed step below
// kMaxPhaseStep could only hide a full turn if the true step exceeded
// 2 pi - kMaxPhaseStep, well above this.
constexpr double kInitialPhaseStep = 3.5;

double wrap_angle(double a) {
  while (a > kPi) a -= 2 * kPi;
  while (a < -kPi) a += 2 * kPi;
  return a;
}

struct Sample {
  double s;
  Cplx f;
};

}  // namespace

Cplx Edge::at(double c) const {
  if (closed && c == c1) c = c0;
  switch (kind) {
    case Kind::horizontal:
      return {c, fixed};
    case Kind::vertical:
      return {fixed, c};
    case Kind::radial:
      return std::polar(c, fixed);
    case Kind::arc:
      return center + std::polar(fixed, c);
  }
  return {};
}

std::vector<Edge> Cell::boundary() const {
  auto edge = [](Edge::Kind kind, double fixed, double c0, double c1) {
    Edge e;
    e.kind = kind;
    e.fixed = fixed;
    e.c0 = c0;
    e.c1 = c1;
    return e;
  };
  using K = Edge::Kind;
  switch (shape) {
    case Shape::rect:
      return {edge(K::horizontal, v0, u0, u1), edge(K::vertical, u1, v0, v1), edge(K::horizontal, v1, u1, u0),
              edge(K::vertical, u0, v1, v0)};
    case Shape::sector:
      return {edge(K::radial, v0, u0, u1), edge(K::arc, u1, v0, v1), edge(K::radial, v1, u1, u0),
              edge(K::arc, u0, v1, v0)};
    case Shape::disk: {
      Edge e = edge(K::arc, u1, 0.0, 2 * kPi);
      e.center = Cplx(u0, v0);
      e.closed = true;
      return {e};
    }
  }
  return {};
}

Cplx Cell::point(double fu, double fv) const {
  switch (shape) {
    case Shape::rect:
      return {u0 + fu * (u1 - u0), v0 + fv * (v1 - v0)};
    case Shape::sector:
      return std::polar(u0 + fu * (u1 - u0), v0 + fv * (v1 - v0));
    case Shape::disk:
      return Cplx(u0, v0) + std::polar(fu * u1, 2 * kPi * fv);
  }
  return {};
}

Cplx Cell::center() const { return shape == Shape::disk ? Cplx(u0, v0) : point(0.5, 0.5); }

double Cell::diameter() const {
  switch (shape) {
    case Shape::rect:
      return std::hypot(u1 - u0, v1 - v0);
    case Shape::sector:
      return std::hypot(u1 - u0, u1 * std::min(v1 - v0, 2 * kPi));
    case Shape::disk:
      return 2 * u1;
  }
  return 0.0;
}

bool Cell::contains(Cplx z, double slack) const {
  switch (shape) {
    case Shape::rect:
      return z.real() >= u0 - slack && z.real() <= u1 + slack && z.imag() >= v0 - slack &&
             z.imag() <= v1 + slack;
    case Shape::sector: {
      const double r = std::abs(z);
      if (r < u0 - slack || r > u1 + slack) return false;
      const double mid = 0.5 * (v0 + v1);
      const double half = 0.5 * (v1 - v0) + (r > 0 ? slack / r : kPi);
      return std::abs(wrap_angle(std::arg(z) - mid)) <= half;
    }
    case Shape::disk:
      return std::abs(z - Cplx(u0, v0)) <= u1 + slack;
  }
  return false;
}

std::array<Cell, 4> Cell::split(double fu, double fv) const {
  const double um = u0 + fu * (u1 - u0);
  const double vm = v0 + fv * (v1 - v0);
  return {Cell{shape, u0, um, v0, vm}, Cell{shape, um, u1, v0, vm}, Cell{shape, u0, um, vm, v1},
          Cell{shape, um, u1, vm, v1}};
}

Cell Cell::expanded(double delta) const {
  switch (shape) {
    case Shape::rect:
      return rect(u0 - delta, u1 + delta, v0 - delta, v1 + delta);
    case Shape::sector: {
      const double w = (v1 - v0) * delta;
      return sector(std::max(u0 * (1 - delta), 0.5 * u0), u1 * (1 + delta), v0 - w, v1 + w);
    }
    case Shape::disk:
      return Cell{Shape::disk, u0, u1 * (1 + delta), v0, 0.0};
  }
  return *this;
}

int winding_number(const AnalyticFn& f, const Cell& cell, const PhaseRate& rate, double zero_floor,
                   int max_samples) {
  int samples = 0;
  auto eval = [&](const Edge& e, double c) {
    const Cplx z = e.at(c);
    const Cplx v = f(z);
    if (!(std::abs(v) > zero_floor)) throw BoundaryHit(z);
    ++samples;
    return v;
  };

  double total = 0.0;
  for (const Edge& edge : cell.boundary()) {
    double peak = 0.0;
    for (int i = 0; i <= 32; ++i) peak = std::max(peak, rate(edge.at(edge.c0 + (edge.c1 - edge.c0) * i / 32.0)));
    // Lattice spacing: the largest power of two meeting the initial step.
    const double want = kInitialPhaseStep / (1.25 * peak * edge.scale());
    const double span = std::abs(edge.c1 - edge.c0);
    const double h = std::ldexp(1.0, static_cast<int>(std::floor(std::log2(std::max(want, span / (0.5 * max_samples))))));
    std::vector<double> coords{edge.c0};
    const double lo = std::min(edge.c0, edge.c1), hi = std::max(edge.c0, edge.c1);
    const double first = std::floor(lo / h) + 1.0, last = std::ceil(hi / h) - 1.0;
    if (edge.c1 > edge.c0)
      for (double k = first; k <= last; k += 1.0) coords.push_back(k * h);
    else
      for (double k = last; k >= first; k -= 1.0) coords.push_back(k * h);
    coords.push_back(edge.c1);

    std::vector<Sample> pending;
    pending.reserve(64);
    Sample left{coords[0], eval(edge, coords[0])};
    for (std::size_t i = 1; i < coords.size(); ++i) {
      pending.push_back({coords[i], eval(edge, coords[i])});
      // Depth-first refinement of [left, right].
      while (!pending.empty()) {
        const Sample r = pending.back();
        const double step = std::arg(r.f / left.f);
        if (std::abs(step) < kMaxPhaseStep) {
          total += step;
          left = r;
          pending.pop_back();
          continue;
        }
        const double mid = 0.5 * (left.s + r.s);
        if (std::abs(r.s - left.s) < 1e-13 * std::max(1.0, span) || samples >= max_samples)
          throw BoundaryHit(edge.at(mid));
        pending.push_back({mid, eval(edge, mid)});
      }
    }
  }
  return static_cast<int>(std::lround(total / (2 * kPi)));
}

}  // namespace fractrace::detail
