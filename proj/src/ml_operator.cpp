#include "fractrace/ml_operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "coefficients.hpp"
#include "fractrace/errors.hpp"
#include "mpfr_value.hpp"

namespace fractrace {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxTerms = 10000;
constexpr int kQuietRun = 20;
constexpr double kTailRatio = 1e-20;
constexpr double kDoubleTarget = 1e-13;
constexpr double kExtendedTarget = 1e-16;
constexpr double kWarnLevel = 1e-9;
constexpr long kMaxBits = 20000;

struct MatrixSeries {
  RealMatrix value;
  double max_term = 0.0;
  double abs_error = 0.0;
  bool capped = false;
};

int decay_index(const MLParams& p, double r) {
  if (r == 0.0) return 1;
  const double k = (std::pow(r, 1.0 / p.alpha) - p.beta) / p.alpha;
  return k > 0.0 ? static_cast<int>(std::min(k, 1e6)) + 2 : 2;
}

class Tail {
 public:
  Tail(const MLParams& p, double r) : from_(decay_index(p, r)) {}
  bool done(int k, double term, double partial) {
    const bool small = term == 0.0 || term <= kTailRatio * partial || term < 1e-300;
    quiet_ = (k > from_ && small) ? quiet_ + 1 : 0;
    return quiet_ >= kQuietRun;
  }

 private:
  int from_;
  int quiet_ = 0;
};

// Powers are carried as (B / rho)^k so that neither B^k nor 1/Gamma
// under/overflows before their product does.
MatrixSeries series_double(const MLParams& p, const RealMatrix& B) {
  const Eigen::Index n = B.rows();
  const double r = B.lpNorm<Eigen::Infinity>();
  const double rho = std::max(1.0, r);
  const RealMatrix Bs = B / rho;
  const double log_rho = std::log(rho);

  RealMatrix P = RealMatrix::Identity(n, n);
  RealMatrix S = RealMatrix::Zero(n, n);
  MatrixSeries out;
  double weighted = 0.0;
  Tail tail(p, r);

  for (int k = 0;; ++k) {
    if (k >= kMaxTerms) {
      out.capped = true;
      break;
    }
    const double x = p.alpha * k + p.beta;
    double scale = 0.0;
    if (!(x <= 0.0 && x == std::floor(x))) {
      int sign = 1;
      const double lg = lgamma_r(x, &sign);
      scale = sign * std::exp(k * log_rho - lg);
    }
    const RealMatrix term = scale * P;
    S += term;
    const double mag = max_norm(term);
    out.max_term = std::max(out.max_term, mag);
    weighted += (static_cast<double>(k) * n + 4.0) * mag;
    if (tail.done(k, mag, max_norm(S))) break;
    P = P * Bs;
  }
  out.value = S;
  out.abs_error = kEps * weighted;
  return out;
}

MatrixSeries series_mpfr(const MLParams& p, const RealMatrix& B, mpfr_prec_t prec) {
  using detail::Mpfr;
  const Eigen::Index n = B.rows();
  const auto idx = [n](Eigen::Index i, Eigen::Index j) { return static_cast<std::size_t>(i * n + j); };

  auto table = detail::coefficient_table(p.alpha, p.beta, prec);
  std::vector<Mpfr> b, power, next, sum;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      b.emplace_back(prec, B(i, j));
      power.emplace_back(prec, i == j ? 1.0 : 0.0);
      next.emplace_back(prec, 0.0);
      sum.emplace_back(prec, 0.0);
    }
  Mpfr term(prec), prod(prec);

  MatrixSeries out;
  double weighted = 0.0;
  Tail tail(p, B.lpNorm<Eigen::Infinity>());

  for (int k = 0;; ++k) {
    if (k >= kMaxTerms) {
      out.capped = true;
      break;
    }
    const Mpfr& c = (*table)[static_cast<std::size_t>(k)];
    double mag = 0.0, partial = 0.0;
    for (std::size_t e = 0; e < sum.size(); ++e) {
      mpfr_mul(term.get(), power[e].get(), c.get(), MPFR_RNDN);
      mpfr_add(sum[e].get(), sum[e].get(), term.get(), MPFR_RNDN);
      mag = std::max(mag, std::abs(term.to_double()));
      partial = std::max(partial, std::abs(sum[e].to_double()));
    }
    out.max_term = std::max(out.max_term, mag);
    weighted += (static_cast<double>(k) * n + 4.0) * mag;
    if (tail.done(k, mag, partial)) break;

    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        Mpfr& dst = next[idx(i, j)];
        mpfr_set_zero(dst.get(), 1);
        for (Eigen::Index l = 0; l < n; ++l) {
          mpfr_mul(prod.get(), power[idx(i, l)].get(), b[idx(l, j)].get(), MPFR_RNDN);
          mpfr_add(dst.get(), dst.get(), prod.get(), MPFR_RNDN);
        }
      }
    std::swap(power, next);
  }

  out.value.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) out.value(i, j) = sum[idx(i, j)].to_double();
  out.abs_error = std::ldexp(weighted, -static_cast<int>(prec));
  return out;
}

double relative(double abs_error, double magnitude) {
  if (abs_error == 0.0) return 0.0;
  return magnitude > 0.0 ? abs_error / magnitude : std::numeric_limits<double>::infinity();
}

// Returns the value and whether it falls short of kWarnLevel.
std::pair<RealMatrix, bool> series_path(const MLParams& p, const RealMatrix& B) {
  const double r = B.lpNorm<Eigen::Infinity>();
  if (r > domain_radius(p.alpha)) {
    std::ostringstream msg;
    msg << "||t^alpha A||_inf = " << r << " exceeds the evaluation radius "
        << domain_radius(p.alpha) << " of the series path";
    throw DomainError(msg.str());
  }
  const MatrixSeries d = series_double(p, B);
  const double mag = max_norm(d.value);
  const double rel = relative(d.abs_error, mag);
  if (d.capped) return {d.value, true};
  if (rel <= kDoubleTarget) return {d.value, false};

  const double log2_max = std::log2(d.max_term);
  const double log2_val = rel < 0.5 ? std::log2(mag) : std::log2(d.abs_error) - 40.0;
  long bits = 53 + static_cast<long>(std::ceil(std::max(0.0, log2_max - log2_val))) + 40;
  const long cap = std::min(kMaxBits, std::max<long>(256, static_cast<long>(std::ceil(log2_max)) + 320));
  const mpfr_prec_t cap_bucket = detail::precision_bucket(cap);

  MatrixSeries s;
  double srel = HUGE_VAL;
  for (int attempt = 0; attempt < 6; ++attempt) {
    const mpfr_prec_t bucket = detail::precision_bucket(std::min(bits, cap));
    s = series_mpfr(p, B, bucket);
    srel = relative(s.abs_error, max_norm(s.value));
    if (srel <= kExtendedTarget || bucket >= cap_bucket || s.capped) break;
    const double missing = std::isfinite(srel) ? std::log2(srel / kExtendedTarget) : 128.0;
    bits = bucket + std::max<long>(32, static_cast<long>(std::ceil(missing)) + 16);
  }
  return {s.value, s.capped || !(srel <= kWarnLevel)};
}

RealMatrix eigen_path(const MLParams& p, double s, const EigenDecomp& ed) {
  const Eigen::Index n = ed.values.size();
  ComplexVector w(n);
  for (Eigen::Index i = 0; i < n; ++i) w(i) = ml_eval(p, s * ed.values(i)).value;
  const ComplexMatrix VW = ed.vectors * w.asDiagonal();
  // M V = V W  =>  M = V W V^{-1}, solved as V^T M^T = (V W)^T.
  const ComplexMatrix M =
      ed.vectors.transpose().partialPivLu().solve(VW.transpose()).transpose();
  const double scale = max_norm(M);
  const double dust = M.imag().cwiseAbs().maxCoeff();
  if (dust > 1e-9 * scale) {
    std::ostringstream msg;
    msg << "eigen path produced imaginary parts of size " << dust << " against norm " << scale;
    throw NonConvergence(msg.str());
  }
  return M.real();
}

}  // namespace

const char* to_string(OperatorMethod m) {
  return m == OperatorMethod::eigen_path ? "eigen_path" : "series_path";
}

MLOperator ml_matrix(const MLParams& p, double t, const RealMatrix& A, PathChoice path) {
  p.validate();
  check_square(A);
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvalidParam("time must be finite and non-negative");

  MLOperator out;
  out.params = p;
  out.t = t;
  out.A = A;
  const Eigen::Index n = A.rows();

  if (t == 0.0) {
    out.matrix = recip_gamma(p.beta) * RealMatrix::Identity(n, n);
    out.method = path == PathChoice::series ? OperatorMethod::series_path : OperatorMethod::eigen_path;
    return out;
  }

  const double s = std::pow(t, p.alpha);
  bool use_series = path == PathChoice::series;
  EigenDecomp ed;
  if (!use_series) {
    ed = eigen(A);
    if (!ed.diagonalizable) {
      if (path == PathChoice::eigen)
        throw InvalidParam("eigen path requested for a matrix that is not diagonalizable");
      use_series = true;
    }
  }

  if (use_series) {
    auto [value, warn] = series_path(p, s * A);
    out.matrix = std::move(value);
    out.method = OperatorMethod::series_path;
    out.accuracy_warning = warn;
  } else {
    out.matrix = eigen_path(p, s, ed);
    out.method = OperatorMethod::eigen_path;
  }
  if (!out.matrix.allFinite()) throw DomainError("operator entries overflowed");
  return out;
}

EigenvalueMap eigenvalue_map_check(const MLParams& p, double t, const RealMatrix& A) {
  const EigenDecomp ea = eigen(A);
  if (!ea.diagonalizable) throw InvalidParam("eigenvalue map check needs a diagonalizable matrix");
  const RealMatrix M = ml_matrix(p, t, A).matrix;
  const ComplexVector mu = eigen(M).values;
  const double s = std::pow(t, p.alpha);

  EigenvalueMap out;
  std::vector<bool> used(static_cast<std::size_t>(mu.size()), false);
  for (Eigen::Index i = 0; i < ea.values.size(); ++i) {
    const Complex expected = ml_eval(p, s * ea.values(i)).value;
    std::size_t best = 0;
    double best_d = HUGE_VAL;
    for (std::size_t j = 0; j < used.size(); ++j) {
      if (used[j]) continue;
      const double d = std::abs(mu(static_cast<Eigen::Index>(j)) - expected);
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    used[best] = true;
    out.pairs.push_back({ea.values(i), expected, mu(static_cast<Eigen::Index>(best))});
    out.max_mismatch = std::max(out.max_mismatch, best_d / std::max(1.0, std::abs(expected)));
  }
  return out;
}

std::vector<InvertibilityReport> invertibility_scan(const MLParams& p, const RealMatrix& A,
                                                    std::vector<double> t_grid,
                                                    const std::vector<CriticalPair>& criticals) {
  std::sort(t_grid.begin(), t_grid.end());
  std::vector<InvertibilityReport> out;
  out.reserve(t_grid.size());
  for (double t : t_grid) {
    const RealMatrix M = ml_matrix(p, t, A).matrix;
    InvertibilityReport r;
    r.t = t;
    r.det_value = det(M);
    r.invertible = std::abs(r.det_value) > tol_singular(M);
    if (!criticals.empty()) {
      r.nearest_critical = *std::min_element(
          criticals.begin(), criticals.end(), [t](const CriticalPair& a, const CriticalPair& b) {
            return std::abs(a.T - t) < std::abs(b.T - t);
          });
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace fractrace
