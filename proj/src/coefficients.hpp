#pragma once

#include <memory>
#include <vector>

#include "double_double.hpp"
#include "mpfr_value.hpp"

namespace fractrace::detail {

/// 1/Gamma(alpha k + beta) for k = 0, 1, ... at a fixed MPFR precision,
/// extended on demand. Values are correctly rounded, so a table is a pure
/// function of (alpha, beta, precision) no matter how it was grown.
class CoefficientTable {
 public:
  CoefficientTable(double alpha, double beta, mpfr_prec_t prec);

  mpfr_prec_t precision() const { return prec_; }
  const Mpfr& operator[](std::size_t k);

 private:
  void extend_to(std::size_t k);

  double alpha_;
  double beta_;
  mpfr_prec_t prec_;
  std::vector<Mpfr> values_;
};

/// Double-double copy of the 128-bit table, for the intermediate tier.
class DDCoefficientTable {
 public:
  DDCoefficientTable(double alpha, double beta);
  DD operator[](std::size_t k);

 private:
  std::shared_ptr<CoefficientTable> source_;
  std::vector<DD> values_;
};

/// Round a requested precision up to the cache bucket actually used.
mpfr_prec_t precision_bucket(long bits);

/// Per-thread cache of coefficient tables keyed by (alpha, beta, bucket).
std::shared_ptr<CoefficientTable> coefficient_table(double alpha, double beta, mpfr_prec_t bucket);

/// Per-thread cache of double-double tables keyed by (alpha, beta).
std::shared_ptr<DDCoefficientTable> dd_coefficient_table(double alpha, double beta);

}  // namespace fractrace::detail
