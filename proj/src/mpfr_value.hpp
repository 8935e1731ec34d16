#pragma once

#include <mpfr.h>

#include <utility>

namespace fractrace::detail {

/// Owning handle for an mpfr_t.
class Mpfr {
 public:
  explicit Mpfr(mpfr_prec_t prec) { mpfr_init2(v_, prec); }
  Mpfr(mpfr_prec_t prec, double x) {
    mpfr_init2(v_, prec);
    mpfr_set_d(v_, x, MPFR_RNDN);
  }
  Mpfr(const Mpfr& other) {
    mpfr_init2(v_, mpfr_get_prec(other.v_));
    mpfr_set(v_, other.v_, MPFR_RNDN);
  }
  Mpfr(Mpfr&& other) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, other.v_);
  }
  Mpfr& operator=(const Mpfr& other) {
    if (this != &other) {
      mpfr_set_prec(v_, mpfr_get_prec(other.v_));
      mpfr_set(v_, other.v_, MPFR_RNDN);
    }
    return *this;
  }
  Mpfr& operator=(Mpfr&& other) noexcept {
    mpfr_swap(v_, other.v_);
    return *this;
  }
  ~Mpfr() { mpfr_clear(v_); }

  mpfr_ptr get() { return v_; }
  mpfr_srcptr get() const { return v_; }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  mpfr_prec_t precision() const { return mpfr_get_prec(v_); }

 private:
  mpfr_t v_;
};

/// Complex number as a pair of MPFR reals; only the handful of operations the
/// series kernels need.
struct MpfrComplex {
  Mpfr re;
  Mpfr im;

  explicit MpfrComplex(mpfr_prec_t prec) : re(prec, 0.0), im(prec, 0.0) {}
  MpfrComplex(mpfr_prec_t prec, double r, double i) : re(prec, r), im(prec, i) {}
};

/// out = a * b. `scratch` must have the same precision; out may alias a.
inline void mul(MpfrComplex& out, const MpfrComplex& a, const MpfrComplex& b, Mpfr& s1, Mpfr& s2,
                Mpfr& s3) {
  mpfr_mul(s1.get(), a.re.get(), b.re.get(), MPFR_RNDN);
  mpfr_mul(s2.get(), a.im.get(), b.im.get(), MPFR_RNDN);
  mpfr_mul(s3.get(), a.re.get(), b.im.get(), MPFR_RNDN);
  mpfr_fma(out.im.get(), a.im.get(), b.re.get(), s3.get(), MPFR_RNDN);
  mpfr_sub(out.re.get(), s1.get(), s2.get(), MPFR_RNDN);
}

}  // namespace fractrace::detail
