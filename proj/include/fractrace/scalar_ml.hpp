#pragma once

#include <complex>

namespace fractrace {

using Complex = std::complex<double>;

/// Hard modulus limit of the series evaluator.
inline constexpr double kZMax = 50.0;

/// Largest admissible |z|^(1/alpha). Beyond it E_{alpha,beta} may overflow a
/// double in the growth sector and the series needs thousands of digits.
inline constexpr double kMaxGrowthExponent = 700.0;

struct MLParams {
  double alpha = 1.0;
  double beta = 1.0;

  /// Throws InvalidParam unless 0 < alpha <= 1 and beta is finite.
  void validate() const;
};

enum class SeriesMethod { series, compensated_series, extended_precision_series };

const char* to_string(SeriesMethod m);

struct EvalResult {
  Complex value;
  double est_rel_error = 0.0;
  SeriesMethod method = SeriesMethod::series;
  /// Set when the term cap was hit or the precision cap could not meet the
  /// error target (typically right on top of a zero).
  bool accuracy_degraded = false;
};

/// 1/Gamma(x); exactly zero at the poles x = 0, -1, -2, ...
double recip_gamma(double x);

/// Radius of the disk on which ml_eval accepts arguments for this alpha:
/// min(kZMax, kMaxGrowthExponent^alpha).
double domain_radius(double alpha);

/// E_{alpha,beta}(z) = sum_k z^k / Gamma(alpha k + beta).
///
/// The series is summed in double with compensated accumulation. When the
/// ratio of the largest term to the result exceeds 1e6 the sum is redone in
/// double-double, or in MPFR at a precision sized to the observed cancellation
/// when that exceeds 2^48, so the relative error stays near 1e-15 away from
/// zeros of the function.
///
/// Throws DomainError if |z| > domain_radius(alpha), InvalidParam on bad
/// parameters or non-finite z.
EvalResult ml_eval(const MLParams& p, Complex z);

/// d/dz E_{alpha,beta}(z) = sum_{k>=1} k z^(k-1) / Gamma(alpha k + beta).
EvalResult ml_deriv(const MLParams& p, Complex z);

/// Convenience wrappers returning only the value.
inline Complex ml(double alpha, double beta, Complex z) { return ml_eval({alpha, beta}, z).value; }
inline Complex ml(double alpha, Complex z) { return ml_eval({alpha, 1.0}, z).value; }

}  // namespace fractrace
