#include "qpsi/mpnum.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <vector>

namespace qpsi {

namespace {

// Relative rounding unit at precision p, with headroom for a few chained ops.
Real rounding_unit(mpfr_prec_t p, long shift) { return Real::pow2(-static_cast<long>(p) + shift, 64); }

}  // namespace

Real Real::parse(std::string_view s, mpfr_prec_t prec) {
  Real r(prec);
  std::string buf(s);
  if (mpfr_set_str(r.v_, buf.c_str(), 10, MPFR_RNDN) != 0) {
    throw QpsiError("Real::parse: malformed decimal literal '" + buf + "'");
  }
  return r;
}

std::string Real::to_string(std::size_t digits) const {
  if (mpfr_nan_p(v_)) return "nan";
  if (mpfr_inf_p(v_)) return mpfr_sgn(v_) < 0 ? "-inf" : "inf";
  if (mpfr_zero_p(v_)) return "0";
  mpfr_exp_t e = 0;
  char* s = mpfr_get_str(nullptr, &e, 10, digits, v_, MPFR_RNDN);
  std::string mant(s);
  mpfr_free_str(s);
  std::string sign;
  if (!mant.empty() && mant[0] == '-') {
    sign = "-";
    mant.erase(0, 1);
  }
  // mpfr convention: value = 0.mant * 10^e  ->  render as d.ddd...e(exp)
  std::string out = sign;
  out += mant.substr(0, 1);
  if (mant.size() > 1) {
    out += '.';
    out += mant.substr(1);
  }
  out += 'e';
  long exp10 = static_cast<long>(e) - 1;
  out += (exp10 < 0 ? "-" : "+") + std::to_string(std::labs(exp10));
  return out;
}

std::string Real::to_string_exact() const {
  // ceil(p * log10(2)) + 2 digits guarantee round-trip identity.
  std::size_t digits = static_cast<std::size_t>(std::ceil(static_cast<double>(prec()) * 0.3010299957)) + 2;
  return to_string(digits);
}

// ---------------------------------------------------------------------------
// Complex
// ---------------------------------------------------------------------------

Complex powi(const Complex& a, long k) {
  mpfr_prec_t p = a.prec();
  if (k == 0) return Complex::one(p);
  bool invert = k < 0;
  unsigned long n = invert ? static_cast<unsigned long>(-(k + 1)) + 1ul : static_cast<unsigned long>(k);
  Complex base = a;
  Complex acc = Complex::one(p);
  while (n > 0) {
    if (n & 1ul) acc = acc * base;
    base = base * base;
    n >>= 1;
  }
  if (invert) return Complex::one(p) / acc;
  return acc;
}

// ---------------------------------------------------------------------------
// BoundedValue arithmetic
// ---------------------------------------------------------------------------

BoundedValue bv_add(const BoundedValue& x, const BoundedValue& y) {
  if (y.exact_zero()) return x;
  if (x.exact_zero()) return y;
  Complex v = x.value + y.value;
  Real rho = mul_up(v.l1_up(), rounding_unit(v.prec(), 1));
  Real e = add_up(add_up(x.abs_err, y.abs_err), rho);
  return BoundedValue(std::move(v), std::move(e));
}

BoundedValue bv_sub(const BoundedValue& x, const BoundedValue& y) { return bv_add(x, bv_neg(y)); }

BoundedValue bv_neg(const BoundedValue& x) { return BoundedValue(-x.value, x.abs_err); }

BoundedValue bv_mul(const BoundedValue& x, const BoundedValue& y) {
  Complex v = x.value * y.value;
  Real ax = x.value.abs_up();
  Real ay = y.value.abs_up();
  Real prop = add_up(add_up(mul_up(ax, y.abs_err), mul_up(ay, x.abs_err)),
                     mul_up(x.abs_err, y.abs_err));
  Real rho = mul_up(mul_up(x.value.l1_up(), y.value.l1_up()), rounding_unit(v.prec(), 2));
  return BoundedValue(std::move(v), add_up(prop, rho));
}

BoundedValue bv_div(const BoundedValue& x, const BoundedValue& y) {
  Real ylo = y.value.abs_down();
  if (!(ylo > y.abs_err)) {
    throw DivisionNearZero("bv_div: |denominator| <= its error bound (pole or precision exhaustion)");
  }
  Complex v = x.value / y.value;
  // |x*/y* - x/y| <= e_x/|y*| + |x| e_y / (|y||y*|), |y*| >= |y|_lo - e_y > 0.
  Real ystar = sub_down(ylo, y.abs_err);
  Real prop = add_up(div_up(x.abs_err, ystar),
                     div_up(mul_up(x.value.abs_up(), y.abs_err), mul_down(ylo, ystar)));
  Real den_lo = mul_down(ylo, ylo);
  Real p1 = mul_up(x.value.l1_up(), y.value.l1_up());
  Real rho = mul_up(div_up(p1, den_lo), rounding_unit(v.prec(), 6));
  return BoundedValue(std::move(v), add_up(prop, rho));
}

BoundedValue bv_powi(const BoundedValue& x, long k) {
  mpfr_prec_t p = x.value.prec();
  if (k == 0) return BoundedValue::exact(Complex::one(p));
  bool invert = k < 0;
  unsigned long n = invert ? static_cast<unsigned long>(-(k + 1)) + 1ul : static_cast<unsigned long>(k);
  BoundedValue base = x;
  BoundedValue acc = BoundedValue::exact(Complex::one(p));
  while (n > 0) {
    if (n & 1ul) acc = bv_mul(acc, base);
    base = bv_mul(base, base);
    n >>= 1;
  }
  if (invert) return bv_div(BoundedValue::exact(Complex::one(p)), acc);
  return acc;
}

Real bv_abs_up(const BoundedValue& x) { return add_up(x.value.abs_up(), x.abs_err); }

Real bv_abs_down(const BoundedValue& x) {
  Real lo = sub_down(x.value.abs_down(), x.abs_err);
  Real z = Real::of_long(0, lo.prec());
  return max_r(lo, z);
}

// ---------------------------------------------------------------------------
// EvalContext
// ---------------------------------------------------------------------------

EvalContext EvalContext::make(const Options& opt) {
  if (opt.precision_digits < 20) {
    throw ConfigError("EvalContext: precision_digits must be >= 20");
  }
  if (opt.max_terms < 1) throw ConfigError("EvalContext: max_terms must be positive");
  // The upper cap keeps the pole-scan window sound: |1 - x| < delta forces
  // |x| into (1/2, 3/2) only when delta < 1/2.
  if (!(opt.pole_distance_min > 0.0) || !(opt.pole_distance_min < 0.5)) {
    throw ConfigError("EvalContext: pole_distance_min must lie in (0, 0.5)");
  }
  // 15 guard digits on top of the requested decimal precision.
  auto bits = static_cast<mpfr_prec_t>(std::ceil((opt.precision_digits + 15) * 3.3219280949));
  Real eps(bits);
  if (opt.eps_term > 0.0) {
    if (opt.eps_term >= 1.0) throw ConfigError("EvalContext: eps_term must lie in (0,1)");
    eps = Real::of_double(opt.eps_term, bits);
  } else {
    eps = Real::pow10(-static_cast<long>(opt.precision_digits) + 10, bits);
  }
  Real pole_min = Real::of_double(opt.pole_distance_min, bits);
  Real floor = Real::pow10(-static_cast<long>(opt.precision_digits), bits);
  return EvalContext(opt.precision_digits, bits, std::move(eps), opt.max_terms, std::move(pole_min),
                     std::move(floor));
}

EvalContext EvalContext::with_eps_exp(long eps_exp) const {
  EvalContext c = *this;
  c.eps_term_ = Real::pow10(-eps_exp, bits_);
  return c;
}

EvalContext EvalContext::with_max_terms(long mt) const {
  if (mt < 1) throw ConfigError("EvalContext: max_terms must be positive");
  EvalContext c = *this;
  c.max_terms_ = mt;
  return c;
}

Real residual_of(const BoundedValue& lhs, const BoundedValue& rhs, const EvalContext& ctx) {
  Real num = (lhs.value - rhs.value).abs_n();
  Real den = lhs.value.abs_n() + rhs.value.abs_n() + ctx.residual_floor();
  return num / den;
}

}  // namespace qpsi
