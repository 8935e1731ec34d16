#include "fractrace/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "fractrace/errors.hpp"

namespace fractrace {

namespace {

using Eigen::VectorXd;

constexpr double kPi = std::numbers::pi;

// Half width of the sector searched around each eigenvalue ray; matches are
// then filtered by the angular tolerance.
constexpr double kRayHalfWidth = 0.02;
constexpr int kCoarse = 200;
constexpr std::size_t kMaxPolish = 32;

double angle_gap(double a, double b) { return std::abs(std::remainder(a - b, 2.0 * kPi)); }

double spectral_radius(const RealMatrix& A) { return eigen(A).values.cwiseAbs().maxCoeff(); }

// Largest t with t^alpha rho(A) inside the scalar evaluation domain.
double time_cap(const FractionalSystem& sys) {
  const double rho = spectral_radius(sys.A);
  if (rho == 0.0) return HUGE_VAL;
  return std::pow(domain_radius(sys.alpha) / rho, 1.0 / sys.alpha) * (1.0 - 1e-9);
}

RealMatrix op(const FractionalSystem& sys, double t, double beta = 1.0) {
  return ml_matrix(sys.params(beta), t, sys.A).matrix;
}

double collapse_reference(const RealMatrix& M) { return std::max(1.0, sigma_max(M)); }

struct RayMatch {
  Complex eigenvalue;
  MLZero zero;
  double T;
  double mismatch;
};

// Zeros of E_{alpha,beta} on the rays of A's eigenvalues within modulus R.
// Conjugate eigenvalues reuse the mirrored search.
std::vector<RayMatch> ray_matches(const FractionalSystem& sys, double beta, double R,
                                  double angular_tol) {
  const MLParams p = sys.params(beta);
  const ComplexVector lambdas = eigen(sys.A).values;
  std::map<double, std::vector<MLZero>> searched;
  std::vector<RayMatch> out;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    const Complex lambda = lambdas(i);
    if (std::abs(lambda) <= 1e-300) continue;
    const double theta = std::arg(lambda);
    std::vector<MLZero> zs;
    if (auto it = searched.find(theta); it != searched.end()) {
      zs = it->second;
    } else if (auto mirror = searched.find(-theta); mirror != searched.end() && theta != 0.0) {
      zs = mirror->second;
      for (auto& z : zs) z.location = std::conj(z.location);
    } else {
      zs = zeros_near_ray(p, theta, kRayHalfWidth, R);
      searched[theta] = zs;
    }
    for (const auto& z : zs) {
      const double mismatch = angle_gap(std::arg(z.location), theta);
      if (mismatch > angular_tol) continue;
      const double T = std::pow(std::abs(z.location) / std::abs(lambda), 1.0 / sys.alpha);
      if (!(T > 0.0) || !std::isfinite(T)) continue;
      out.push_back({lambda, z, T, mismatch});
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RayMatch& a, const RayMatch& b) { return a.T < b.T; });
  return out;
}

double effective_bound(const FractionalSystem& sys, double R) {
  if (!(R > kOriginExclusion)) throw InvalidParam("search bound must exceed the origin exclusion");
  return std::min(R, domain_radius(sys.alpha));
}

struct Polished {
  double a = 0.0;
  double b = 0.0;
  double residual = HUGE_VAL;
};

// Damped Gauss-Newton on r(a, b) = u(b; y) - u(a; x) with a in [alo, ahi],
// b in [blo, bhi]. A variable sitting at t = 0 is frozen (the velocity is
// unbounded there).
Polished polish_pair(const FractionalSystem& sys, const VectorXd& x, const VectorXd& y, double a,
                     double b, double alo, double ahi, double blo, double bhi) {
  auto residual = [&](double s, double t) -> VectorXd { return state(sys, y, t) - state(sys, x, s); };
  VectorXd r = residual(a, b);
  double f = r.norm();
  double mu = 1e-3;
  for (int it = 0; it < 60 && f > 0.0; ++it) {
    Eigen::Matrix<double, Eigen::Dynamic, 2> J(r.size(), 2);
    J.col(0) = a > 0.0 ? VectorXd(-velocity(sys, x, a)) : VectorXd::Zero(r.size());
    J.col(1) = b > 0.0 ? VectorXd(velocity(sys, y, b)) : VectorXd::Zero(r.size());
    const Eigen::Matrix2d JtJ = J.transpose() * J;
    const Eigen::Vector2d g = J.transpose() * r;
    bool improved = false;
    for (int tries = 0; tries < 12; ++tries) {
      Eigen::Matrix2d H = JtJ;
      H(0, 0) += mu * std::max(JtJ(0, 0), 1e-300);
      H(1, 1) += mu * std::max(JtJ(1, 1), 1e-300);
      Eigen::Vector2d step = Eigen::Vector2d::Zero();
      if (JtJ(0, 0) > 0.0 && JtJ(1, 1) > 0.0) {
        step = -H.ldlt().solve(g);
      } else if (JtJ(1, 1) > 0.0) {
        step(1) = -g(1) / H(1, 1);
      } else if (JtJ(0, 0) > 0.0) {
        step(0) = -g(0) / H(0, 0);
      }
      const double na = std::clamp(a + step(0), alo, ahi);
      const double nb = std::clamp(b + step(1), blo, bhi);
      const VectorXd nr = residual(na, nb);
      if (nr.norm() < f) {
        const double moved = std::abs(na - a) + std::abs(nb - b);
        a = na;
        b = nb;
        r = nr;
        f = nr.norm();
        mu = std::max(mu * 0.3, 1e-12);
        improved = true;
        if (moved <= 1e-15 * (1.0 + std::abs(a) + std::abs(b))) return {a, b, f};
        break;
      }
      mu *= 10.0;
    }
    if (!improved) break;
  }
  return {a, b, f};
}

struct GridCandidate {
  std::size_t i, j;
  double gap;
};

// Local minima of D over the 8-neighbourhood, smallest first.
std::vector<GridCandidate> local_minima(const std::vector<std::vector<double>>& D) {
  std::vector<GridCandidate> out;
  const std::size_t n = D.size(), m = n ? D[0].size() : 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < m; ++j) {
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di)
        for (int dj = -1; dj <= 1; ++dj) {
          if (!di && !dj) continue;
          const long ii = static_cast<long>(i) + di, jj = static_cast<long>(j) + dj;
          if (ii < 0 || jj < 0 || ii >= static_cast<long>(n) || jj >= static_cast<long>(m)) continue;
          if (D[ii][jj] < D[i][j]) {
            is_min = false;
            break;
          }
        }
      if (is_min) out.push_back({i, j, D[i][j]});
    }
  std::sort(out.begin(), out.end(),
            [](const GridCandidate& a, const GridCandidate& b) { return a.gap < b.gap; });
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

double cosine(const VectorXd& u, const VectorXd& v) {
  const double d = u.norm() * v.norm();
  return d > 0.0 ? u.dot(v) / d : 1.0;
}

void check_state(const FractionalSystem& sys, const VectorXd& x) {
  if (x.size() != sys.A.rows()) throw InvalidParam("state vector has the wrong dimension");
  if (!x.allFinite()) throw InvalidParam("state vector must be finite");
}

}  // namespace

void FractionalSystem::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    std::ostringstream msg;
    msg << "system order must satisfy 0 < alpha < 1, got " << alpha;
    throw InvalidParam(msg.str());
  }
  check_square(A);
}

FractionalSystem system_from_zero(double alpha, Complex seed, double beta) {
  const Complex z = refine_zero({alpha, beta}, seed).location;
  FractionalSystem sys{alpha, RealMatrix(2, 2)};
  sys.A << z.real(), z.imag(), -z.imag(), z.real();
  return sys;
}

Tolerances Tolerances::scaled(double factor) const {
  if (!(factor > 0.0) || !std::isfinite(factor)) throw InvalidParam("tolerance scale must be positive");
  Tolerances t = *this;
  for (double* v : {&t.angular, &t.asymptotic_band, &t.collapse, &t.membership, &t.round_trip,
                    &t.witness, &t.stationary, &t.origin})
    *v *= factor;
  return t;
}

const char* to_string(Verdict v) { return v == Verdict::TypeI ? "Type I" : "Type II"; }

const char* to_string(PointKind k) {
  switch (k) {
    case PointKind::node:
      return "node";
    case PointKind::cusp:
      return "cusp";
    case PointKind::unresolved:
      return "unresolved";
  }
  return "unknown";
}

VectorXd state(const FractionalSystem& sys, const VectorXd& x0, double t) {
  sys.validate();
  check_state(sys, x0);
  return op(sys, t) * x0;
}

Trajectory solve_trajectory(const FractionalSystem& sys, const VectorXd& x0,
                            const std::vector<double>& t_grid) {
  sys.validate();
  check_state(sys, x0);
  Trajectory out{sys, x0, {}};
  out.samples.reserve(t_grid.size());
  for (std::size_t j = 0; j < t_grid.size(); ++j) {
    if (j > 0 && !(t_grid[j] > t_grid[j - 1])) throw InvalidParam("time grid must increase strictly");
    out.samples.push_back({t_grid[j], op(sys, t_grid[j]) * x0});
  }
  return out;
}

std::vector<double> uniform_grid(double t_max, double h) {
  if (!(h > 0.0) || !(t_max > 0.0)) throw InvalidParam("grid needs t_max > 0 and h > 0");
  const auto n = static_cast<std::size_t>(std::llround(t_max / h));
  std::vector<double> out(n + 1);
  for (std::size_t j = 0; j <= n; ++j) out[j] = static_cast<double>(j) * h;
  return out;
}

IVPResidual ivp_residual(const FractionalSystem& sys, const VectorXd& x0, double h, double t_lo,
                         double t_hi) {
  const Trajectory tr = solve_trajectory(sys, x0, uniform_grid(t_hi, h));
  const auto d = caputo_l1(tr.samples, sys.alpha);
  IVPResidual out;
  for (std::size_t m = 0; m < d.size(); ++m) {
    const double t = d[m].t;
    if (t < t_lo - 1e-12 || t > t_hi + 1e-12) continue;
    const VectorXd ax = sys.A * tr.samples[m + 1].x;
    out.max_abs = std::max(out.max_abs, (d[m].x - ax).norm());
    out.scale = std::max(out.scale, ax.norm());
  }
  out.relative = out.scale > 0.0 ? out.max_abs / out.scale : (out.max_abs > 0.0 ? HUGE_VAL : 0.0);
  return out;
}

std::vector<CriticalRay> critical_times(const FractionalSystem& sys, double R,
                                        const Tolerances& tol) {
  sys.validate();
  std::vector<CriticalRay> out;
  for (const auto& m : ray_matches(sys, 1.0, effective_bound(sys, R), tol.angular))
    out.push_back({m.eigenvalue, m.zero, m.T, m.mismatch});
  return out;
}

Classification classify(const FractionalSystem& sys, double R, const Tolerances& tol) {
  sys.validate();
  Classification out;
  out.search_bound = effective_bound(sys, R);
  out.criticals = critical_times(sys, R, tol);
  out.verdict = out.criticals.empty() ? Verdict::TypeI : Verdict::TypeII;

  const double edge = sys.alpha * kPi / 2.0;
  const ComplexVector lambdas = eigen(sys.A).values;
  for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
    const Complex lambda = lambdas(i);
    if (std::abs(std::abs(std::arg(lambda)) - edge) >= tol.asymptotic_band) continue;
    const bool matched = std::any_of(out.criticals.begin(), out.criticals.end(),
                                     [&](const CriticalRay& c) { return c.eigenvalue == lambda; });
    if (!matched) out.asymptotic_flags.push_back(lambda);
  }
  return out;
}

RealBasis operator_kernel(const FractionalSystem& sys, double T, const Tolerances& tol) {
  const RealMatrix M = op(sys, T);
  return kernel_basis(M, tol.collapse, collapse_reference(M));
}

RealBasis operator_image(const FractionalSystem& sys, double T, const Tolerances& tol) {
  const RealMatrix M = op(sys, T);
  return image_basis(M, tol.collapse, collapse_reference(M));
}

std::optional<ZeroIntersection> zero_intersection(const FractionalSystem& sys, const VectorXd& x0,
                                                  double R, const Tolerances& tol) {
  sys.validate();
  check_state(sys, x0);
  const double n0 = x0.norm();
  if (n0 == 0.0) return std::nullopt;
  double last_T = -1.0;
  for (const auto& c : critical_times(sys, R, tol)) {
    if (std::abs(c.T - last_T) <= 1e-12 * c.T) continue;
    last_T = c.T;
    const RealMatrix M = op(sys, c.T);
    const RealBasis K = kernel_basis(M, tol.collapse, collapse_reference(M));
    const double res = distance_to_span(K, x0) / n0;
    if (res > tol.membership) continue;
    const double reached = (M * x0).norm();
    if (reached > tol.origin * n0) continue;
    return ZeroIntersection{c.T, res, reached};
  }
  return std::nullopt;
}

VectorXd AffineSet::point(const VectorXd& coeffs) const {
  if (coeffs.size() != directions.dim()) throw InvalidParam("coefficient count must match the fiber dimension");
  return directions.dim() ? VectorXd(base + directions.vectors * coeffs) : base;
}

Trajectory inverse_curve(const FractionalSystem& sys, const VectorXd& x0,
                         const std::vector<double>& t_grid) {
  sys.validate();
  check_state(sys, x0);
  Trajectory out{sys, x0, {}};
  out.samples.reserve(t_grid.size());
  for (double t : t_grid) out.samples.push_back({t, inverse(op(sys, t)) * x0});
  return out;
}

EvolvedCurve evolve_inverse_curve(const FractionalSystem& sys, const VectorXd& x0, double T_tilde,
                                  const std::vector<double>& t_grid) {
  const RealMatrix E = op(sys, T_tilde);
  const VectorXd q = E * x0;
  EvolvedCurve out;
  out.direct = inverse_curve(sys, q, t_grid);
  const Trajectory base = inverse_curve(sys, x0, t_grid);
  out.evolved = Trajectory{sys, q, {}};
  for (std::size_t j = 0; j < base.samples.size(); ++j) {
    const VectorXd v = E * base.samples[j].x;
    const double gap = (v - out.direct.samples[j].x).norm();
    const double ref = out.direct.samples[j].x.norm();
    out.max_rel_gap = std::max(out.max_rel_gap, ref > 0.0 ? gap / ref : gap);
    out.evolved.samples.push_back({base.samples[j].t, v});
  }
  return out;
}

std::optional<AffineSet> h_set(const FractionalSystem& sys, const VectorXd& x, double T,
                               const Tolerances& tol) {
  sys.validate();
  check_state(sys, x);
  if (!(T > 0.0)) throw InvalidParam("H set needs T > 0");
  const RealMatrix M = op(sys, T);
  const double ref = collapse_reference(M);
  const RealBasis K = kernel_basis(M, tol.collapse, ref);
  if (K.dim() == 0) return AffineSet{M.partialPivLu().solve(x), K};
  const RealBasis img = image_basis(M, tol.collapse, ref);
  if (distance_to_span(img, x) > tol.membership * (1.0 + x.norm())) return std::nullopt;
  return AffineSet{truncated_solve(M, x, tol.collapse, ref), K};
}

std::variant<VectorXd, AffineSet> eist_preimage(const FractionalSystem& sys, const VectorXd& p,
                                                double T, const Tolerances& tol) {
  auto h = h_set(sys, p, T, tol);
  if (!h) {
    std::ostringstream msg;
    msg << "point is not in the image of the solution operator at T = " << T;
    throw NotReachable(msg.str());
  }
  if (h->directions.dim() == 0) return h->base;
  return *h;
}

VectorXd velocity(const FractionalSystem& sys, const VectorXd& x0, double t) {
  sys.validate();
  check_state(sys, x0);
  if (!(t > 0.0)) throw InvalidParam("velocity needs t > 0");
  return op(sys, t, 0.0) * x0 / t;
}

std::optional<EIDTWitness> eidt_witness(const FractionalSystem& sys, const VectorXd& x0,
                                        const VectorXd& x, const std::vector<double>& T_grid,
                                        const std::vector<double>& t_grid, const Tolerances& tol) {
  sys.validate();
  check_state(sys, x0);
  check_state(sys, x);
  if (T_grid.empty() || t_grid.empty()) return std::nullopt;
  if (x0.norm() == 0.0) return std::nullopt;
  const auto [Tlo, Thi] = std::minmax_element(T_grid.begin(), T_grid.end());
  const auto [tlo, thi] = std::minmax_element(t_grid.begin(), t_grid.end());

  std::vector<VectorXd> U0, Ux;
  for (double T : T_grid) U0.push_back(state(sys, x0, T));
  for (double t : t_grid) Ux.push_back(state(sys, x, t));
  std::vector<std::vector<double>> D(T_grid.size(), std::vector<double>(t_grid.size()));
  for (std::size_t i = 0; i < T_grid.size(); ++i)
    for (std::size_t j = 0; j < t_grid.size(); ++j) D[i][j] = (U0[i] - Ux[j]).norm();

  auto distinct = [](double T, double t) { return std::abs(T - t) >= 1e-4 * (1.0 + std::max(T, t)); };

  std::vector<EIDTWitness> found;
  std::size_t polished = 0;
  for (const auto& c : local_minima(D)) {
    if (polished >= kMaxPolish) break;
    if (!distinct(T_grid[c.i], t_grid[c.j])) continue;
    ++polished;
    const Polished r = polish_pair(sys, x0, x, T_grid[c.i], t_grid[c.j], *Tlo, *Thi, *tlo, *thi);
    if (!distinct(r.a, r.b)) continue;
    const VectorXd meet = state(sys, x0, r.a);
    if (r.residual > tol.witness * (1.0 + meet.norm())) continue;
    found.push_back({r.a, r.b, meet, r.residual});
  }
  if (found.empty()) return std::nullopt;
  std::sort(found.begin(), found.end(), [](const EIDTWitness& a, const EIDTWitness& b) {
    return a.T != b.T ? a.T < b.T : a.t < b.t;
  });
  return found.front();
}

std::vector<SPoint> sample_S(const FractionalSystem& sys, const VectorXd& x0,
                             const std::vector<double>& T_grid, const std::vector<double>& t_grid,
                             double R, const Tolerances& tol) {
  sys.validate();
  check_state(sys, x0);
  std::vector<VectorXd> targets;
  for (double T : T_grid) targets.push_back(state(sys, x0, T));

  std::vector<SPoint> out;
  for (double t : t_grid) {
    RealMatrix E = op(sys, t);
    Eigen::PartialPivLU<RealMatrix> lu(E);
    if (!(std::abs(lu.determinant()) > tol_singular(E))) continue;
    for (std::size_t i = 0; i < T_grid.size(); ++i) {
      const VectorXd pt = lu.solve(targets[i]);
      const double res = (E * pt - targets[i]).norm();
      if (res > tol.witness * (1.0 + pt.norm())) continue;
      out.push_back({pt, T_grid[i], t, res, false});
    }
  }

  const auto criticals = critical_times(sys, R, tol);
  double last_T = -1.0;
  for (const auto& c : criticals) {
    if (std::abs(c.T - last_T) <= 1e-12 * c.T) continue;
    last_T = c.T;
    const RealMatrix E = op(sys, c.T);
    for (std::size_t i = 0; i < T_grid.size(); ++i) {
      const auto H = h_set(sys, targets[i], c.T, tol);
      if (!H) continue;
      const Eigen::Index k = H->directions.dim();
      const int per = k <= 2 ? 5 : 3;
      const auto coeff_values = linspace(-2.0, 2.0, per);
      std::vector<int> digits(static_cast<std::size_t>(k), 0);
      while (true) {
        VectorXd c_vec(k);
        for (Eigen::Index d = 0; d < k; ++d) c_vec(d) = coeff_values[static_cast<std::size_t>(digits[static_cast<std::size_t>(d)])];
        const VectorXd pt = H->point(c_vec);
        const double res = (E * pt - targets[i]).norm();
        if (res <= tol.witness * (1.0 + pt.norm())) out.push_back({pt, T_grid[i], c.T, res, true});
        std::size_t d = 0;
        while (d < digits.size() && ++digits[d] == per) digits[d++] = 0;
        if (d == digits.size()) break;
      }
    }
  }
  return out;
}

DoublePoint classify_double_point(const FractionalSystem& sys, const VectorXd& x0, double T,
                                  const Tolerances& tol) {
  sys.validate();
  check_state(sys, x0);
  if (!(T > 0.0)) throw InvalidParam("double point needs T > 0");
  DoublePoint out;
  const VectorXd p = state(sys, x0, T);
  out.velocity_norm = velocity(sys, x0, T).norm();

  const double w = 0.5 * T;
  const double hi = std::min(T + w, time_cap(sys));
  const double min_sep = 1e-3 * w;

  // Crossing search over ordered pairs t1 < t2 in [T - w, T + w]. The loop of
  // a node need not straddle T itself.
  const double lo = T - w;
  const auto g = linspace(lo, hi, 2 * kCoarse);
  std::vector<VectorXd> U;
  for (double t : g) U.push_back(state(sys, x0, t));
  std::vector<std::vector<double>> D(g.size(), std::vector<double>(g.size(), HUGE_VAL));
  for (std::size_t i = 0; i < g.size(); ++i)
    for (std::size_t j = i + 1; j < g.size(); ++j) D[i][j] = (U[i] - U[j]).norm();

  std::size_t polished = 0;
  for (const auto& c : local_minima(D)) {
    if (polished >= kMaxPolish) break;
    if (!std::isfinite(c.gap) || g[c.j] - g[c.i] < min_sep) continue;
    ++polished;
    const Polished r = polish_pair(sys, x0, x0, g[c.i], g[c.j], lo, hi, lo, hi);
    if (r.b - r.a < min_sep) continue;
    const double cs = cosine(velocity(sys, x0, r.a), velocity(sys, x0, r.b));
    const bool crossing = r.residual <= 1e-6 && std::abs(cs) <= 0.99;
    if (crossing || (out.kind != PointKind::node && r.residual < out.crossing_gap)) {
      out.t1 = r.a;
      out.t2 = r.b;
      out.crossing_gap = r.residual;
      out.crossing_cos = cs;
    }
    if (crossing) {
      out.kind = PointKind::node;
      break;
    }
  }

  const double delta = std::min(1e-3 * w, 0.5 * (hi - T));
  if (delta > 0.0)
    out.reversal_cos = cosine(velocity(sys, x0, T - delta), velocity(sys, x0, T + delta));
  if (out.kind != PointKind::node && out.velocity_norm <= tol.stationary * (1.0 + p.norm()) &&
      out.reversal_cos < -0.5)
    out.kind = PointKind::cusp;
  return out;
}

std::vector<MultiplePoint> multiple_points(const FractionalSystem& sys, const VectorXd& x0,
                                           double R, const Tolerances& tol) {
  sys.validate();
  check_state(sys, x0);
  const double n0 = x0.norm();
  std::vector<MultiplePoint> out;
  if (n0 == 0.0) return out;
  double last_T = -1.0;
  for (const auto& m : ray_matches(sys, 0.0, effective_bound(sys, R), tol.angular)) {
    if (std::abs(m.T - last_T) <= 1e-12 * m.T) continue;
    last_T = m.T;
    const RealMatrix V = op(sys, m.T, 0.0);
    const RealBasis K = kernel_basis(V, tol.collapse, collapse_reference(V));
    if (distance_to_span(K, x0) > tol.membership * n0) continue;
    MultiplePoint mp;
    mp.T = m.T;
    mp.p = state(sys, x0, m.T);
    mp.zero = m.zero;
    mp.detail = classify_double_point(sys, x0, m.T, tol);
    mp.kind = mp.detail.kind;
    mp.velocity_norm = mp.detail.velocity_norm;
    out.push_back(std::move(mp));
  }
  return out;
}

}  // namespace fractrace
