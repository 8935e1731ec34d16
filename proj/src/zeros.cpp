#include "fractrace/zeros.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cmath>
#include <numbers>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "contour.hpp"
#include "fractrace/errors.hpp"

namespace fractrace {

namespace {

using detail::BoundaryHit;
using detail::Cell;

constexpr double kPi = std::numbers::pi;
constexpr double kAcceptResidual = 1e-8;
constexpr double kTargetResidual = 1e-10;
constexpr int kNewtonIterations = 100;
constexpr int kPerturbationRetries = 5;
constexpr double kMinCellDiameter = 1e-8;

// Split fractions tried in turn when a cut line passes too close to a zero.
constexpr std::array<std::pair<double, double>, 6> kSplits{{
    {0.5, 0.5}, {0.4731, 0.5389}, {0.5417, 0.4603}, {0.4409, 0.4481}, {0.5793, 0.5711}, {0.3917, 0.6133}}};

// Evaluations of E_{alpha,beta} keyed by the exact sample point. Cells that
// share a boundary line reuse each other's samples.
class Memo {
 public:
  explicit Memo(const MLParams& p) : p_(p) {}

  const MLParams& params() const { return p_; }

  Complex operator()(Complex z) {
    const Key key{std::bit_cast<std::uint64_t>(z.real()), std::bit_cast<std::uint64_t>(z.imag())};
    auto [it, inserted] = values_.try_emplace(key);
    if (inserted) it->second = ml_eval(p_, z).value;
    return it->second;
  }

 private:
  using Key = std::pair<std::uint64_t, std::uint64_t>;
  struct KeyHash {
    std::size_t operator()(const Key& k) const { return std::hash<std::uint64_t>{}(k.first * 0x9E3779B97F4A7C15ULL ^ k.second); }
  };

  MLParams p_;
  std::unordered_map<Key, Complex, KeyHash> values_;
};

bool is_trivial_zero(const MLParams& p, Complex z) {
  return p.beta == 0.0 && std::abs(z) < kOriginExclusion;
}

// Phase speed of E_{alpha,beta} from its growth-sector asymptotics
// (1/alpha) z^((1-beta)/alpha) exp(z^(1/alpha)), plus one rad per unit length
// for the algebraic terms.
detail::PhaseRate phase_rate(const MLParams& p) {
  return [p](Complex z) {
    const double r = std::max(std::abs(z), kOriginExclusion);
    return std::pow(r, 1.0 / p.alpha - 1.0) / p.alpha + std::abs(1.0 - p.beta) / (p.alpha * r) + 1.0;
  };
}

// Raw winding count with the trivial beta = 0 zero removed when the cell
// encloses the origin.
int cell_count(Memo& memo, const Cell& cell) {
  const MLParams& p = memo.params();
  int n = detail::winding_number([&memo](Complex z) { return memo(z); }, cell, phase_rate(p));
  if (p.beta == 0.0 && cell.contains({0.0, 0.0}, 0.0)) --n;
  return n;
}

struct Newton {
  Complex z;
  double residual;
};

// Plain Newton with an optional step cap. Converged means the correction
// fell to roundoff level and the residual meets the acceptance bound. With a
// cell given, iterates straying more than one diameter outside it give up.
std::optional<Newton> newton(const MLParams& p, Complex seed, double step_cap,
                             const Cell* cell = nullptr) {
  Complex z = seed;
  try {
    for (int it = 0; it < kNewtonIterations; ++it) {
      const Complex e = ml_eval(p, z).value;
      const Complex d = ml_deriv(p, z).value;
      if (std::abs(d) == 0.0) return std::nullopt;
      Complex step = e / d;
      if (std::abs(step) > step_cap) step *= step_cap / std::abs(step);
      z -= step;
      if (cell && !cell->contains(z, cell->diameter())) return std::nullopt;
      if (std::abs(step) <= 1e-14 * std::max(1.0, std::abs(z))) {
        // One more correction, then measure.
        const Complex e2 = ml_eval(p, z).value;
        const Complex d2 = ml_deriv(p, z).value;
        if (std::abs(d2) > 0.0 && std::abs(e2) > kTargetResidual) z -= e2 / d2;
        const double res = std::abs(ml_eval(p, z).value);
        if (res <= kAcceptResidual) return Newton{z, res};
        return std::nullopt;
      }
    }
  } catch (const DomainError&) {
    return std::nullopt;
  }
  return std::nullopt;
}

// Outer contour radius: rounding in polar() must not push rim samples past
// the evaluation domain when the caller asks for exactly its radius.
double rim_radius(const MLParams& p, double radius) {
  return std::min(radius, domain_radius(p.alpha) * (1.0 - 1e-12));
}

std::vector<Complex> perturbed_seeds(Complex center, double radius) {
  std::vector<Complex> seeds{center};
  for (int j = 0; j < 8; ++j) seeds.push_back(center + std::polar(radius, 0.3 + j * kPi / 4));
  return seeds;
}

MLZero make_zero(const MLParams& p, Complex z, double residual, int multiplicity = 1) {
  MLZero out;
  out.params = p;
  out.location = z;
  out.residual = residual;
  out.multiplicity = multiplicity;
  return out;
}

class CellSearch {
 public:
  explicit CellSearch(Memo& memo) : memo_(memo), p_(memo.params()) {}

  void run(const Cell& cell, int count) {
    if (count <= 0) return;
    const double diam = cell.diameter();

    if (count == 1) {
      const double slack = 1e-9 * diam + 1e-13;
      for (Complex seed : perturbed_seeds(cell.center(), 0.25 * diam)) {
        if (!cell.contains(seed, 0.0)) continue;
        auto root = newton(p_, seed, diam, &cell);
        if (root && cell.contains(root->z, slack) && !is_trivial_zero(p_, root->z)) {
          found_.push_back(make_zero(p_, root->z, root->residual));
          return;
        }
      }
      if (diam < kMinCellDiameter) {
        std::ostringstream msg;
        msg << "Newton failed to converge inside cell around " << cell.center();
        throw ConvergenceError(msg.str());
      }
    }

    if (count >= 2 && diam < kMinCellDiameter) {
      // Cannot separate further: report the cluster once.
      const Complex c = cell.center();
      found_.push_back(make_zero(p_, c, std::abs(ml_eval(p_, c).value), count));
      return;
    }

    for (auto [fu, fv] : kSplits) {
      const auto children = cell.split(fu, fv);
      std::array<int, 4> counts{};
      bool ok = true;
      int total = 0;
      try {
        for (std::size_t i = 0; i < 4; ++i) {
          counts[i] = cell_count(memo_, children[i]);
          total += counts[i];
        }
      } catch (const BoundaryHit&) {
        ok = false;
      }
      if (!ok || total != count) continue;
      for (std::size_t i = 0; i < 4; ++i) run(children[i], counts[i]);
      return;
    }
    std::ostringstream msg;
    msg << "could not subdivide cell around " << cell.center() << " without touching a zero";
    throw BoundaryZeroError(msg.str());
  }

  std::vector<MLZero> take() { return std::move(found_); }

 private:
  Memo& memo_;
  MLParams p_;
  std::vector<MLZero> found_;
};

// Winding count of `cell`, growing it slightly until the boundary stays clear
// of zeros. Returns the cell actually used.
std::pair<Cell, int> settle(Memo& memo, Cell cell, double delta) {
  const MLParams& p = memo.params();
  for (int attempt = 0; attempt <= kPerturbationRetries; ++attempt) {
    const Cell trial = attempt == 0 ? cell : cell.expanded(delta * attempt * (1.0 + 0.37 * attempt));
    try {
      return {trial, cell_count(memo, trial)};
    } catch (const BoundaryHit&) {
    }
  }
  std::ostringstream msg;
  msg << "E_{" << p.alpha << "," << p.beta
      << "} vanishes on the search boundary; shift the region";
  throw BoundaryZeroError(msg.str());
}

Cell rect_cell(const SearchRegion& r) { return Cell::rect(r.re_min, r.re_max, r.im_min, r.im_max); }

double rect_delta(const SearchRegion& r) {
  return 1e-6 * std::max(r.re_max - r.re_min, r.im_max - r.im_min);
}

std::vector<MLZero> search(const MLParams& p, const std::vector<Cell>& cells, double delta) {
  Memo memo(p);
  CellSearch searcher(memo);
  for (const Cell& c : cells) {
    auto [used, count] = settle(memo, c, delta);
    searcher.run(used, count);
  }
  auto zeros = searcher.take();
  sort_and_index(zeros);
  return zeros;
}

}  // namespace

void SearchRegion::validate() const {
  if (!(re_min < re_max) || !(im_min < im_max))
    throw InvalidParam("search region needs re_min < re_max and im_min < im_max");
  if (!std::isfinite(re_min) || !std::isfinite(re_max) || !std::isfinite(im_min) ||
      !std::isfinite(im_max))
    throw InvalidParam("search region bounds must be finite");
}

void sort_and_index(std::vector<MLZero>& zeros) {
  std::sort(zeros.begin(), zeros.end(), [](const MLZero& a, const MLZero& b) {
    const double ma = std::abs(a.location), mb = std::abs(b.location);
    if (std::abs(ma - mb) > 1e-9 * std::max(1.0, ma)) return ma < mb;
    return a.location.imag() > b.location.imag();
  });
  int index = 0;
  for (std::size_t i = 0; i < zeros.size(); ++i) {
    const bool conj_of_prev =
        i > 0 && std::abs(zeros[i].location - std::conj(zeros[i - 1].location)) <=
                     1e-8 * std::max(1.0, std::abs(zeros[i].location)) &&
        zeros[i - 1].location.imag() > 0.0;
    if (!conj_of_prev) ++index;
    zeros[i].index = index;
  }
}

int count_zeros(const MLParams& p, const SearchRegion& region) {
  p.validate();
  region.validate();
  Memo memo(p);
  return settle(memo, rect_cell(region), rect_delta(region)).second;
}

std::vector<MLZero> find_zeros(const MLParams& p, const SearchRegion& region,
                               std::size_t max_count) {
  p.validate();
  region.validate();
  auto zeros = search(p, {rect_cell(region)}, rect_delta(region));
  if (zeros.size() > max_count) zeros.resize(max_count);
  return zeros;
}

MLZero refine_zero(const MLParams& p, Complex seed) {
  p.validate();
  const double scale = 1e-3 * std::max(1.0, std::abs(seed));
  for (Complex s : perturbed_seeds(seed, scale)) {
    auto root = newton(p, s, std::max(1.0, std::abs(s)));
    if (root && !is_trivial_zero(p, root->z)) return make_zero(p, root->z, root->residual);
  }
  std::ostringstream msg;
  msg << "Newton refinement of E_{" << p.alpha << "," << p.beta << "} from " << seed
      << " did not converge";
  throw ConvergenceError(msg.str());
}

std::vector<MLZero> zeros_in_disk(const MLParams& p, double radius) {
  p.validate();
  if (!(radius > kOriginExclusion)) throw InvalidParam("disk radius must exceed the origin exclusion");
  if (radius > domain_radius(p.alpha)) throw DomainError("disk radius exceeds the evaluation domain");

  // Annulus split into eight sectors; the cuts avoid the real axis, where
  // E_{alpha,beta} is real and a cut would be likely to meet a real zero.
  // If any cut or the rim touches a zero, rotate the cuts and pull the rim in.
  Memo memo(p);
  std::vector<MLZero> zeros;
  bool settled = false;
  for (int attempt = 0; attempt <= kPerturbationRetries && !settled; ++attempt) {
    const double start = -kPi + 0.0123 + 0.0071 * attempt;
    const double rim = rim_radius(p, radius) * (1.0 - 1e-7 * attempt);
    std::vector<std::pair<Cell, int>> cells;
    try {
      for (int j = 0; j < 8; ++j) {
        const Cell c = Cell::sector(kOriginExclusion, rim, start + j * kPi / 4,
                                    start + (j + 1) * kPi / 4);
        cells.emplace_back(c, cell_count(memo, c));
      }
    } catch (const BoundaryHit&) {
      continue;
    }
    CellSearch searcher(memo);
    for (const auto& [c, n] : cells) searcher.run(c, n);
    zeros = searcher.take();
    settled = true;
  }
  if (!settled) throw BoundaryZeroError("zero table contour keeps meeting zeros; change the radius");

  // Inner disk: nothing beyond the trivial beta = 0 zero is expected.
  if (cell_count(memo, Cell::disk({0.0, 0.0}, kOriginExclusion)) != 0) {
    const double h = kOriginExclusion;
    auto inner = find_zeros(p, {-h, h, -h, h});
    for (auto& z : inner)
      if (std::abs(z.location) > 0.0) zeros.push_back(z);
  }
  sort_and_index(zeros);
  return zeros;
}

std::vector<MLZero> zeros_near_ray(const MLParams& p, double angle, double half_width,
                                   double radius) {
  p.validate();
  if (!(half_width > 0.0)) throw InvalidParam("sector half width must be positive");
  if (radius > domain_radius(p.alpha)) throw DomainError("ray length exceeds the evaluation domain");
  const Cell cell =
      Cell::sector(kOriginExclusion, rim_radius(p, radius), angle - half_width, angle + half_width);
  return search(p, {cell}, 0.25);
}

}  // namespace fractrace
