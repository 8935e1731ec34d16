#include "coefficients.hpp"

#include <map>
#include <tuple>

namespace fractrace::detail {

CoefficientTable::CoefficientTable(double alpha, double beta, mpfr_prec_t prec)
    : alpha_(alpha), beta_(beta), prec_(prec) {}

const Mpfr& CoefficientTable::operator[](std::size_t k) {
  if (k >= values_.size()) extend_to(k);
  return values_[k];
}

void CoefficientTable::extend_to(std::size_t k) {
  // Work precision carries the product alpha*k exactly (53 + 64 bits).
  const mpfr_prec_t work = prec_ + 64;
  Mpfr x(work);
  Mpfr alpha(work, alpha_);
  Mpfr beta(work, beta_);
  Mpfr g(work);
  values_.reserve(k + 1);
  for (std::size_t j = values_.size(); j <= k; ++j) {
    mpfr_mul_ui(x.get(), alpha.get(), static_cast<unsigned long>(j), MPFR_RNDN);
    mpfr_add(x.get(), x.get(), beta.get(), MPFR_RNDN);
    Mpfr c(prec_, 0.0);
    const bool pole = mpfr_integer_p(x.get()) && mpfr_sgn(x.get()) <= 0;
    if (!pole) {
      mpfr_gamma(g.get(), x.get(), MPFR_RNDN);
      mpfr_ui_div(c.get(), 1, g.get(), MPFR_RNDN);
    }
    values_.push_back(std::move(c));
  }
}

DDCoefficientTable::DDCoefficientTable(double alpha, double beta)
    : source_(coefficient_table(alpha, beta, 128)) {}

DD DDCoefficientTable::operator[](std::size_t k) {
  while (values_.size() <= k) {
    const Mpfr& c = (*source_)[values_.size()];
    Mpfr rest(c);
    const double hi = c.to_double();
    mpfr_sub_d(rest.get(), rest.get(), hi, MPFR_RNDN);
    values_.push_back({hi, rest.to_double()});
  }
  return values_[k];
}

mpfr_prec_t precision_bucket(long bits) {
  // 128, 192, 256, 384, 512, 768, ...: two buckets per doubling.
  mpfr_prec_t b = 128;
  while (true) {
    if (bits <= b) return b;
    if (bits <= b + b / 2) return b + b / 2;
    b *= 2;
  }
}

std::shared_ptr<CoefficientTable> coefficient_table(double alpha, double beta, mpfr_prec_t bucket) {
  using Key = std::tuple<double, double, mpfr_prec_t>;
  constexpr std::size_t kMaxTables = 48;
  thread_local std::map<Key, std::shared_ptr<CoefficientTable>> cache;

  const Key key{alpha, beta, bucket};
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  if (cache.size() >= kMaxTables) cache.clear();
  auto table = std::make_shared<CoefficientTable>(alpha, beta, bucket);
  cache.emplace(key, table);
  return table;
}

std::shared_ptr<DDCoefficientTable> dd_coefficient_table(double alpha, double beta) {
  using Key = std::pair<double, double>;
  constexpr std::size_t kMaxTables = 48;
  thread_local std::map<Key, std::shared_ptr<DDCoefficientTable>> cache;

  const Key key{alpha, beta};
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  if (cache.size() >= kMaxTables) cache.clear();
  auto table = std::make_shared<DDCoefficientTable>(alpha, beta);
  cache.emplace(key, table);
  return table;
}

}  // namespace fractrace::detail
