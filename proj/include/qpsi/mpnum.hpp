#pragma once

#include <mpfr.h>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace qpsi {

// ---------------------------------------------------------------------------
// Error taxonomy shared by all modules.
// ---------------------------------------------------------------------------

struct QpsiError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// |denominator| is not certifiably larger than its own error bound.
struct DivisionNearZero : QpsiError {
  using QpsiError::QpsiError;
};

// A q-shifted-factorial denominator factor came within pole_distance_min of 0.
struct PoleError : QpsiError {
  using QpsiError::QpsiError;
};

// A series ran past max_terms or its tail could not be certified geometric.
struct NoConvergence : QpsiError {
  using QpsiError::QpsiError;
};

// A parameter set violates an identity's constraint, modulus or guard.
struct ConstraintViolation : QpsiError {
  using QpsiError::QpsiError;
};

// Bad sweep/CLI configuration, including an empty admissible region.
struct ConfigError : QpsiError {
  using QpsiError::QpsiError;
};

// ---------------------------------------------------------------------------
// Real: a value-semantic wrapper over mpfr_t.
//
// Value arithmetic rounds to nearest. The *_up / *_down variants round away
// from / toward -inf and are used exclusively for error-bound bookkeeping,
// so every bound we propagate is a true upper bound.
// ---------------------------------------------------------------------------

class Real {
 public:
  Real() : Real(static_cast<mpfr_prec_t>(64)) {}
  explicit Real(mpfr_prec_t prec) {
    mpfr_init2(v_, prec);
    mpfr_set_nan(v_);
  }
  Real(const Real& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
  }
  Real(Real&& o) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, o.v_);
  }
  Real& operator=(const Real& o) {
    if (this != &o) {
      mpfr_set_prec(v_, mpfr_get_prec(o.v_));
      mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
  }
  Real& operator=(Real&& o) noexcept {
    if (this != &o) mpfr_swap(v_, o.v_);
    return *this;
  }
  ~Real() { mpfr_clear(v_); }

  static Real of_long(long x, mpfr_prec_t prec) {
    Real r(prec);
    mpfr_set_si(r.v_, x, MPFR_RNDN);
    return r;
  }
  static Real of_double(double x, mpfr_prec_t prec) {
    Real r(prec);
    mpfr_set_d(r.v_, x, MPFR_RNDN);
    return r;
  }
  // Base-10 parse; throws on malformed input.
  static Real parse(std::string_view s, mpfr_prec_t prec);
  // 10^e, exactly representable up to rounding at `prec`.
  static Real pow10(long e, mpfr_prec_t prec) {
    Real r(prec);
    mpfr_set_si(r.v_, 10, MPFR_RNDN);
    mpfr_pow_si(r.v_, r.v_, e, MPFR_RNDN);
    return r;
  }
  // 2^e (exact).
  static Real pow2(long e, mpfr_prec_t prec) {
    Real r(prec);
    mpfr_set_si_2exp(r.v_, 1, e, MPFR_RNDN);
    return r;
  }

  mpfr_prec_t prec() const { return mpfr_get_prec(v_); }
  bool is_nan() const { return mpfr_nan_p(v_) != 0; }
  bool is_finite() const { return mpfr_number_p(v_) != 0; }
  bool is_zero() const { return mpfr_zero_p(v_) != 0; }
  int sign() const { return mpfr_sgn(v_); }
  double to_double() const { return mpfr_get_d(v_, MPFR_RNDN); }
  long to_long() const { return mpfr_get_si(v_, MPFR_RNDN); }

  // Deterministic decimal rendering with `digits` significant digits.
  std::string to_string(std::size_t digits) const;
  // Enough digits for a lossless binary->decimal->binary round trip.
  std::string to_string_exact() const;

  mpfr_srcptr raw() const { return v_; }
  mpfr_ptr raw() { return v_; }

  friend Real operator+(const Real& a, const Real& b) { return bin(a, b, mpfr_add, MPFR_RNDN); }
  friend Real operator-(const Real& a, const Real& b) { return bin(a, b, mpfr_sub, MPFR_RNDN); }
  friend Real operator*(const Real& a, const Real& b) { return bin(a, b, mpfr_mul, MPFR_RNDN); }
  friend Real operator/(const Real& a, const Real& b) { return bin(a, b, mpfr_div, MPFR_RNDN); }
  friend Real operator-(const Real& a) {
    Real r(a.prec());
    mpfr_neg(r.v_, a.v_, MPFR_RNDN);
    return r;
  }

  friend Real add_up(const Real& a, const Real& b) { return bin(a, b, mpfr_add, MPFR_RNDU); }
  friend Real sub_up(const Real& a, const Real& b) { return bin(a, b, mpfr_sub, MPFR_RNDU); }
  friend Real mul_up(const Real& a, const Real& b) { return bin(a, b, mpfr_mul, MPFR_RNDU); }
  friend Real div_up(const Real& a, const Real& b) { return bin(a, b, mpfr_div, MPFR_RNDU); }
  friend Real add_down(const Real& a, const Real& b) { return bin(a, b, mpfr_add, MPFR_RNDD); }
  friend Real sub_down(const Real& a, const Real& b) { return bin(a, b, mpfr_sub, MPFR_RNDD); }
  friend Real mul_down(const Real& a, const Real& b) { return bin(a, b, mpfr_mul, MPFR_RNDD); }
  friend Real div_down(const Real& a, const Real& b) { return bin(a, b, mpfr_div, MPFR_RNDD); }

  friend Real abs_r(const Real& a) {
    Real r(a.prec());
    mpfr_abs(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend Real min_r(const Real& a, const Real& b) { return bin(a, b, mpfr_min, MPFR_RNDN); }
  friend Real max_r(const Real& a, const Real& b) { return bin(a, b, mpfr_max, MPFR_RNDN); }
  friend Real sqrt_r(const Real& a) {
    Real r(a.prec());
    mpfr_sqrt(r.v_, a.v_, MPFR_RNDN);
    return r;
  }
  friend Real hypot_rnd(const Real& a, const Real& b, mpfr_rnd_t rnd) {
    Real r(std::max(a.prec(), b.prec()));
    mpfr_hypot(r.v_, a.v_, b.v_, rnd);
    return r;
  }
  friend Real pow_si_rnd(const Real& a, long e, mpfr_rnd_t rnd) {
    Real r(a.prec());
    mpfr_pow_si(r.v_, a.v_, e, rnd);
    return r;
  }

  friend int cmp(const Real& a, const Real& b) { return mpfr_cmp(a.v_, b.v_); }
  friend bool operator<(const Real& a, const Real& b) { return mpfr_less_p(a.v_, b.v_) != 0; }
  friend bool operator<=(const Real& a, const Real& b) { return mpfr_lessequal_p(a.v_, b.v_) != 0; }
  friend bool operator>(const Real& a, const Real& b) { return mpfr_greater_p(a.v_, b.v_) != 0; }
  friend bool operator>=(const Real& a, const Real& b) { return mpfr_greaterequal_p(a.v_, b.v_) != 0; }
  friend bool operator==(const Real& a, const Real& b) { return mpfr_equal_p(a.v_, b.v_) != 0; }

 private:
  using BinOp = int (*)(mpfr_ptr, mpfr_srcptr, mpfr_srcptr, mpfr_rnd_t);
  static Real bin(const Real& a, const Real& b, BinOp op, mpfr_rnd_t rnd) {
    Real r(std::max(a.prec(), b.prec()));
    op(r.v_, a.v_, b.v_, rnd);
    return r;
  }
  mpfr_t v_;
};

// ---------------------------------------------------------------------------
// Complex arithmetic over Real. Plain rectangular form; division goes through
// the conjugate. abs_up()/abs_down() give certified modulus bounds.
// ---------------------------------------------------------------------------

struct Complex {
  Real re, im;

  Complex() = default;
  Complex(Real r, Real i) : re(std::move(r)), im(std::move(i)) {}

  static Complex of_real(Real r) {
    Real z(r.prec());
    mpfr_set_zero(z.raw(), 1);
    return Complex(std::move(r), std::move(z));
  }
  static Complex zero(mpfr_prec_t prec) { return of_real(Real::of_long(0, prec)); }
  static Complex one(mpfr_prec_t prec) { return of_real(Real::of_long(1, prec)); }

  mpfr_prec_t prec() const { return std::max(re.prec(), im.prec()); }
  bool is_zero() const { return re.is_zero() && im.is_zero(); }
  bool is_finite() const { return re.is_finite() && im.is_finite(); }

  Real abs_up() const { return hypot_rnd(re, im, MPFR_RNDU); }
  Real abs_down() const { return hypot_rnd(re, im, MPFR_RNDD); }
  Real abs_n() const { return hypot_rnd(re, im, MPFR_RNDN); }
  Real l1_up() const { return add_up(abs_r(re), abs_r(im)); }

  friend Complex operator+(const Complex& a, const Complex& b) {
    return Complex(a.re + b.re, a.im + b.im);
  }
  friend Complex operator-(const Complex& a, const Complex& b) {
    return Complex(a.re - b.re, a.im - b.im);
  }
  friend Complex operator-(const Complex& a) { return Complex(-a.re, -a.im); }
  friend Complex operator*(const Complex& a, const Complex& b) {
    return Complex(a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re);
  }
  friend Complex operator*(const Complex& a, const Real& s) { return Complex(a.re * s, a.im * s); }
  friend Complex operator/(const Complex& a, const Complex& b) {
    Real den = b.re * b.re + b.im * b.im;
    return Complex((a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den);
  }
  friend Complex conj(const Complex& a) { return Complex(a.re, -a.im); }

  // z^k by square-and-multiply (value-level; see bv_powi for bounded version).
  friend Complex powi(const Complex& a, long k);
};

// ---------------------------------------------------------------------------
// BoundedValue: complex value + rigorous absolute error bound.
//
// Propagation is first-order interval style: sums add bounds, products use
// |x| e_y + |y| e_x + e_x e_y, and every rule adds a directed-rounding term
// covering the floating-point work of the operation itself.
// ---------------------------------------------------------------------------

struct BoundedValue {
  Complex value;
  Real abs_err;

  BoundedValue() = default;
  BoundedValue(Complex v, Real e) : value(std::move(v)), abs_err(std::move(e)) {}

  static BoundedValue exact(Complex v) {
    Real e(v.prec());
    mpfr_set_zero(e.raw(), 1);
    return BoundedValue(std::move(v), std::move(e));
  }
  static BoundedValue exact_long(long v, mpfr_prec_t prec) {
    return exact(Complex::of_real(Real::of_long(v, prec)));
  }

  bool exact_zero() const { return value.is_zero() && abs_err.is_zero(); }
};

BoundedValue bv_add(const BoundedValue& x, const BoundedValue& y);
BoundedValue bv_sub(const BoundedValue& x, const BoundedValue& y);
BoundedValue bv_neg(const BoundedValue& x);
BoundedValue bv_mul(const BoundedValue& x, const BoundedValue& y);
// Throws DivisionNearZero unless |y.value| certifiably exceeds y.abs_err.
BoundedValue bv_div(const BoundedValue& x, const BoundedValue& y);
BoundedValue bv_powi(const BoundedValue& x, long k);

// Certified upper bound on |true value|.
Real bv_abs_up(const BoundedValue& x);
// Certified lower bound on |true value| (clamped at 0).
Real bv_abs_down(const BoundedValue& x);

// ---------------------------------------------------------------------------
// EvalContext: immutable evaluation environment.
// ---------------------------------------------------------------------------

class EvalContext {
 public:
  struct Options {
    int precision_digits = 50;
    // <= 0 means the default 10^(-precision_digits + 10).
    double eps_term = 0.0;
    long max_terms = 10000;
    double pole_distance_min = 1e-3;
  };

  static EvalContext make(const Options& opt);
  static EvalContext make() { return make(Options{}); }
  static EvalContext with_digits(int digits) {
    Options o;
    o.precision_digits = digits;
    return make(o);
  }
  // Same context, tighter term-negligibility threshold (10^-eps_exp).
  EvalContext with_eps_exp(long eps_exp) const;
  EvalContext with_max_terms(long mt) const;

  int precision_digits() const { return digits_; }
  mpfr_prec_t bits() const { return bits_; }
  const Real& eps_term() const { return eps_term_; }
  long max_terms() const { return max_terms_; }
  const Real& pole_distance_min() const { return pole_min_; }
  // Absolute floor 10^(-precision_digits) used in symmetric relative residuals.
  const Real& residual_floor() const { return floor_; }

  Real real(double x) const { return Real::of_double(x, bits_); }
  Real real(long x) const { return Real::of_long(x, bits_); }
  Real real(int x) const { return Real::of_long(x, bits_); }
  Real real(std::string_view s) const { return Real::parse(s, bits_); }
  Real zero() const { return Real::of_long(0, bits_); }
  Real one() const { return Real::of_long(1, bits_); }
  Complex complex(double re, double im = 0.0) const {
    return Complex(real(re), real(im));
  }
  Complex complex(std::string_view re, std::string_view im = "0") const {
    return Complex(real(re), real(im));
  }

 private:
  EvalContext(int digits, mpfr_prec_t bits, Real eps, long max_terms, Real pole_min, Real floor)
      : digits_(digits),
        bits_(bits),
        eps_term_(std::move(eps)),
        max_terms_(max_terms),
        pole_min_(std::move(pole_min)),
        floor_(std::move(floor)) {}

  int digits_;
  mpfr_prec_t bits_;
  Real eps_term_;
  long max_terms_;
  Real pole_min_;
  Real floor_;
};

// Symmetric relative residual |L - R| / (|L| + |R| + 10^-digits).
Real residual_of(const BoundedValue& lhs, const BoundedValue& rhs, const EvalContext& ctx);

}  // namespace qpsi
