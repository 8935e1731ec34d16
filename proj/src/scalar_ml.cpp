#include "fractrace/scalar_ml.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "coefficients.hpp"
#include "double_double.hpp"
#include "fractrace/errors.hpp"
#include "mpfr_value.hpp"

namespace fractrace {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();
constexpr int kMaxTerms = 10000;
constexpr int kQuietRun = 20;
constexpr double kTailRatio = 1e-20;
constexpr double kCancellationLimit = 1e6;
// Double results whose own error estimate exceeds this are redone in MPFR.
constexpr double kDoubleTarget = 1e-12;
constexpr double kExtendedTarget = 1e-16;
constexpr long kMaxBits = 20000;

struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

struct SeriesSum {
  Complex value;
  double max_term = 0.0;
  double abs_error = 0.0;
  double last_term = 0.0;
  bool capped = false;
};

// Index beyond which |z|^k / Gamma(alpha k + beta) decreases.
int decay_index(const MLParams& p, double r) {
  if (r == 0.0) return 1;
  const double k = (std::pow(r, 1.0 / p.alpha) - p.beta) / p.alpha;
  return k > 0.0 ? static_cast<int>(std::min(k, 1e6)) + 2 : 2;
}

// Shared termination bookkeeping for both precisions.
class TailMonitor {
 public:
  TailMonitor(const MLParams& p, double r) : decay_from_(decay_index(p, r)) {}

  /// Returns true once kQuietRun consecutive negligible terms were seen.
  bool done(int k, double term_mag, double partial_mag) {
    const bool negligible =
        term_mag == 0.0 || term_mag <= kTailRatio * partial_mag || term_mag < 1e-300;
    quiet_ = (k > decay_from_ && negligible) ? quiet_ + 1 : 0;
    return quiet_ >= kQuietRun;
  }

 private:
  int decay_from_;
  int quiet_ = 0;
};

SeriesSum sum_double(const MLParams& p, Complex z, bool deriv) {
  const double r = std::abs(z);
  const double log_r = r > 0.0 ? std::log(r) : 0.0;
  const Complex unit = r > 0.0 ? z / r : Complex(1.0, 0.0);
  Complex phase(1.0, 0.0);

  Neumaier re, im;
  SeriesSum out;
  double weighted = 0.0;
  TailMonitor tail(p, r);
  const int first = deriv ? 1 : 0;

  for (int k = first;; ++k) {
    if (k - first >= kMaxTerms) {
      out.capped = true;
      break;
    }
    const int m = deriv ? k - 1 : k;
    const double x = p.alpha * k + p.beta;
    const double mult = deriv ? static_cast<double>(k) : 1.0;

    double mag = 0.0;
    double weight = m + 6.0;
    if (m == 0) {
      mag = recip_gamma(x);
    } else if (r > 0.0) {
      const double log_pow = m * log_r;
      if (x < 170.0 && std::abs(log_pow) < 700.0) {
        mag = std::pow(r, m) * recip_gamma(x);
      } else {
        int sign = 1;
        const double lg = lgamma_r(x, &sign);
        mag = sign * std::exp(log_pow - lg);
        weight += std::abs(log_pow) + std::abs(lg);
      }
    }
    const Complex term = (mult * mag) * phase;
    re.add(term.real());
    im.add(term.imag());

    const double term_mag = std::abs(term);
    out.max_term = std::max(out.max_term, term_mag);
    weighted += weight * term_mag;
    out.last_term = term_mag;

    phase *= unit;
    phase /= std::abs(phase);

    if (tail.done(k, term_mag, std::hypot(re.value(), im.value()))) break;
  }

  out.value = Complex(re.value(), im.value());
  out.abs_error = kEps * weighted + kEps * std::abs(out.value);
  return out;
}

SeriesSum sum_dd(const MLParams& p, Complex z, bool deriv) {
  using detail::DD;
  using detail::DDComplex;

  auto table = detail::dd_coefficient_table(p.alpha, p.beta);
  const DDComplex zc{{z.real(), 0.0}, {z.imag(), 0.0}};
  DDComplex power{{1.0, 0.0}, {0.0, 0.0}};
  DDComplex sum{};

  SeriesSum out;
  double weighted = 0.0;
  TailMonitor tail(p, std::abs(z));
  const int first = deriv ? 1 : 0;

  for (int k = first;; ++k) {
    if (k - first >= kMaxTerms) {
      out.capped = true;
      break;
    }
    const int m = deriv ? k - 1 : k;
    DDComplex term = power * (*table)[static_cast<std::size_t>(k)];
    if (deriv) term = {term.re * static_cast<double>(k), term.im * static_cast<double>(k)};
    sum = sum + term;

    const double term_mag = detail::magnitude(term);
    out.max_term = std::max(out.max_term, term_mag);
    weighted += (m + 8.0) * term_mag;
    out.last_term = term_mag;
    power = power * zc;

    if (tail.done(k, term_mag, detail::magnitude(sum))) break;
  }
  out.value = Complex(sum.re.hi + sum.re.lo, sum.im.hi + sum.im.lo);
  out.abs_error = 0x1p-104 * weighted;
  return out;
}

// Upper bound on |re + i im| from the binary exponents; cheap enough to call
// on every term.
double rough_magnitude(const detail::MpfrComplex& c) {
  const bool zr = mpfr_zero_p(c.re.get()) != 0;
  const bool zi = mpfr_zero_p(c.im.get()) != 0;
  if (zr && zi) return 0.0;
  long e = std::numeric_limits<long>::min();
  if (!zr) e = std::max<long>(e, mpfr_get_exp(c.re.get()));
  if (!zi) e = std::max<long>(e, mpfr_get_exp(c.im.get()));
  return std::ldexp(1.4142135623730951, static_cast<int>(std::clamp<long>(e, -1100, 1100)));
}

SeriesSum sum_mpfr(const MLParams& p, Complex z, bool deriv, mpfr_prec_t prec) {
  using detail::Mpfr;
  using detail::MpfrComplex;

  auto table = detail::coefficient_table(p.alpha, p.beta, prec);
  MpfrComplex zc(prec, z.real(), z.imag());
  MpfrComplex power(prec, 1.0, 0.0);
  MpfrComplex term(prec);
  MpfrComplex sum(prec);
  Mpfr s1(prec), s2(prec), s3(prec);

  SeriesSum out;
  double weighted = 0.0;
  TailMonitor tail(p, std::abs(z));
  const int first = deriv ? 1 : 0;

  for (int k = first;; ++k) {
    if (k - first >= kMaxTerms) {
      out.capped = true;
      break;
    }
    const int m = deriv ? k - 1 : k;
    const Mpfr& c = (*table)[static_cast<std::size_t>(k)];
    mpfr_mul(term.re.get(), power.re.get(), c.get(), MPFR_RNDN);
    mpfr_mul(term.im.get(), power.im.get(), c.get(), MPFR_RNDN);
    if (deriv) {
      mpfr_mul_ui(term.re.get(), term.re.get(), static_cast<unsigned long>(k), MPFR_RNDN);
      mpfr_mul_ui(term.im.get(), term.im.get(), static_cast<unsigned long>(k), MPFR_RNDN);
    }
    mpfr_add(sum.re.get(), sum.re.get(), term.re.get(), MPFR_RNDN);
    mpfr_add(sum.im.get(), sum.im.get(), term.im.get(), MPFR_RNDN);

    const double term_mag = rough_magnitude(term);
    out.max_term = std::max(out.max_term, term_mag);
    weighted += (m + 8.0) * term_mag;
    out.last_term = term_mag;

    detail::mul(power, power, zc, s1, s2, s3);

    if (tail.done(k, term_mag, rough_magnitude(sum) * 0.5)) break;
  }

  out.value = Complex(sum.re.to_double(), sum.im.to_double());
  out.abs_error = std::ldexp(weighted, -static_cast<int>(prec));
  return out;
}

double relative(double abs_error, double magnitude) {
  if (abs_error == 0.0) return 0.0;
  return magnitude > 0.0 ? abs_error / magnitude : std::numeric_limits<double>::infinity();
}

double accuracy_claim(double r) { return r <= 20.0 ? 1e-9 : 1e-7; }

EvalResult evaluate(const MLParams& p, Complex z, bool deriv) {
  p.validate();
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw InvalidParam("Mittag-Leffler argument must be finite");
  const double r = std::abs(z);
  if (r > domain_radius(p.alpha)) {
    std::ostringstream msg;
    msg << "|z| = " << r << " exceeds the evaluation radius " << domain_radius(p.alpha)
        << " for alpha = " << p.alpha;
    throw DomainError(msg.str());
  }

  const SeriesSum d = sum_double(p, z, deriv);
  const double mag = std::abs(d.value);
  const double ratio = d.max_term == 0.0 ? 1.0 : (mag > 0.0 ? d.max_term / mag : HUGE_VAL);
  const double rel = relative(d.abs_error, mag);

  if (d.capped) {
    const double tail = relative(kQuietRun * d.last_term, mag);
    return {d.value, rel + tail, SeriesMethod::compensated_series, true};
  }
  if (ratio <= kCancellationLimit && rel <= kDoubleTarget) {
    return {d.value, rel,
            ratio <= 10.0 ? SeriesMethod::series : SeriesMethod::compensated_series, false};
  }

  // When the double sum has no correct digits left its magnitude only bounds
  // the true value from above; where the terms cancel that badly the function
  // itself is at most O(1).
  const double log2_max = std::log2(d.max_term);
  const double log2_val = rel < 0.5 ? std::log2(mag) : std::min(std::log2(d.abs_error) - 40.0, 0.0);
  const double cancellation_bits = std::max(0.0, log2_max - log2_val);

  // Double-double handles up to ~55 bits of cancellation at full double accuracy.
  if (cancellation_bits < 48.0) {
    const SeriesSum dd = sum_dd(p, z, deriv);
    const double ddrel = relative(dd.abs_error, std::abs(dd.value));
    if (!dd.capped && ddrel <= kExtendedTarget * 10.0)
      return {dd.value, ddrel + kEps, SeriesMethod::extended_precision_series, false};
  }

  const long cap =
      std::min(kMaxBits, std::max<long>(256, static_cast<long>(std::ceil(log2_max)) + 320));
  const mpfr_prec_t cap_bucket = detail::precision_bucket(cap);
  long bits = 64 + static_cast<long>(std::ceil(cancellation_bits)) + 16;

  SeriesSum s;
  double srel = HUGE_VAL;
  for (int attempt = 0; attempt < 8; ++attempt) {
    const mpfr_prec_t bucket = detail::precision_bucket(std::min(bits, cap));
    s = sum_mpfr(p, z, deriv, bucket);
    srel = relative(s.abs_error, std::abs(s.value));
    if (srel <= kExtendedTarget || bucket >= cap_bucket || s.capped) break;
    const double missing = std::isfinite(srel) ? std::log2(srel / kExtendedTarget) : 128.0;
    bits = bucket + std::max<long>(32, static_cast<long>(std::ceil(missing)) + 16);
  }
  const bool degraded = s.capped || !(srel <= accuracy_claim(r));
  return {s.value, srel + kEps, SeriesMethod::extended_precision_series, degraded};
}

}  // namespace

void MLParams::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    std::ostringstream msg;
    msg << "alpha must lie in (0, 1], got " << alpha;
    throw InvalidParam(msg.str());
  }
  if (!std::isfinite(beta)) throw InvalidParam("beta must be finite");
}

const char* to_string(SeriesMethod m) {
  switch (m) {
    case SeriesMethod::series:
      return "series";
    case SeriesMethod::compensated_series:
      return "compensated_series";
    case SeriesMethod::extended_precision_series:
      return "extended_precision_series";
  }
  return "unknown";
}

double recip_gamma(double x) {
  if (x <= 0.0 && x == std::floor(x)) return 0.0;
  return 1.0 / std::tgamma(x);
}

double domain_radius(double alpha) { return std::min(kZMax, std::pow(kMaxGrowthExponent, alpha)); }

EvalResult ml_eval(const MLParams& p, Complex z) { return evaluate(p, z, false); }

EvalResult ml_deriv(const MLParams& p, Complex z) { return evaluate(p, z, true); }

}  // namespace fractrace
