#include "qpsi/qpoch.hpp"

#include <string>

namespace qpsi {

namespace {

constexpr long kProductCap = 4000000;  // hard stop for |q| pathologically close to 1

BoundedValue one_bv(mpfr_prec_t p) { return BoundedValue::exact(Complex::one(p)); }

}  // namespace

PochValue poch_inf(const Complex& a, const QBase& base, const EvalContext& ctx) {
  mpfr_prec_t p = ctx.bits();
  BoundedValue prod = one_bv(p);
  BoundedValue w = BoundedValue::exact(a);          // a q^j
  BoundedValue qv = BoundedValue::exact(base.q);
  Real one_minus_q = sub_down(ctx.one(), base.q.abs_up());
  // |q| < 1 guaranteed by QBase, but keep the bound positive under rounding.
  if (!(one_minus_q > ctx.zero())) throw ConfigError("poch_inf: |q| too close to 1");

  long j = 0;
  while (true) {
    Real s_hi = div_up(bv_abs_up(w), one_minus_q);
    if (s_hi < ctx.eps_term()) {
      // Remaining factors multiply the product by 1 + delta, |delta| <= s/(1-s).
      Real mult = div_up(s_hi, sub_down(ctx.one(), s_hi));
      Real tail = mul_up(add_up(bv_abs_up(prod), prod.abs_err), mult);
      prod.abs_err = add_up(prod.abs_err, tail);
      break;
    }
    prod = bv_mul(prod, bv_sub(one_bv(p), w));
    w = bv_mul(w, qv);
    if (++j > kProductCap) throw NoConvergence("poch_inf: factor cap exceeded");
  }
  return PochValue(std::move(prod), PochIndexKind::infinite);
}

namespace {

PochValue poch_int_impl(const Complex& a, long k, const QBase& base, const EvalContext& ctx,
                        bool guard_nonneg) {
  mpfr_prec_t p = ctx.bits();
  if (k == 0) return PochValue(one_bv(p), PochIndexKind::finite_nonneg);

  BoundedValue qv = BoundedValue::exact(base.q);
  if (k > 0) {
    BoundedValue prod = one_bv(p);
    BoundedValue w = BoundedValue::exact(a);
    for (long j = 0; j < k; ++j) {
      BoundedValue f = bv_sub(one_bv(p), w);
      if (guard_nonneg && f.value.abs_down() < ctx.pole_distance_min()) {
        throw PoleError("poch_int: factor (1 - a q^" + std::to_string(j) +
                        ") within pole_distance_min of zero");
      }
      prod = bv_mul(prod, f);
      w = bv_mul(w, qv);
    }
    return PochValue(std::move(prod), PochIndexKind::finite_nonneg);
  }

  // (a)_{-m} = 1 / prod_{j=1..m} (1 - a q^-j); each factor is a divisor.
  long m = -k;
  BoundedValue prod = one_bv(p);
  BoundedValue w = BoundedValue::exact(a);
  for (long j = 1; j <= m; ++j) {
    w = bv_div(w, qv);
    BoundedValue f = bv_sub(one_bv(p), w);
    if (f.value.abs_down() < ctx.pole_distance_min()) {
      throw PoleError("poch_int: denominator factor (1 - a q^-" + std::to_string(j) +
                      ") within pole_distance_min of zero");
    }
    prod = bv_mul(prod, f);
  }
  return PochValue(bv_div(one_bv(p), prod), PochIndexKind::finite_neg);
}

}  // namespace

PochValue poch_int(const Complex& a, long k, const QBase& base, const EvalContext& ctx) {
  return poch_int_impl(a, k, base, ctx, /*guard_nonneg=*/false);
}

PochValue poch_int_guarded(const Complex& a, long k, const QBase& base, const EvalContext& ctx) {
  return poch_int_impl(a, k, base, ctx, /*guard_nonneg=*/true);
}

namespace {

PochIndexKind kind_of(long k) {
  if (k < 0) return PochIndexKind::finite_neg;
  return PochIndexKind::finite_nonneg;
}

}  // namespace

PochValue poch_multi(std::span<const Complex> params, long k, const QBase& base,
                     const EvalContext& ctx) {
  BoundedValue prod = one_bv(ctx.bits());
  for (std::size_t i = 0; i < params.size(); ++i) {
    try {
      prod = bv_mul(prod, poch_int(params[i], k, base, ctx));
    } catch (const PoleError& e) {
      throw PoleError("poch_multi: parameter #" + std::to_string(i) + ": " + e.what());
    }
  }
  return PochValue(std::move(prod), kind_of(k));
}

PochValue poch_multi_inf(std::span<const Complex> params, const QBase& base,
                         const EvalContext& ctx) {
  BoundedValue prod = one_bv(ctx.bits());
  for (std::size_t i = 0; i < params.size(); ++i) {
    prod = bv_mul(prod, poch_inf(params[i], base, ctx));
  }
  return PochValue(std::move(prod), PochIndexKind::infinite);
}

Real elementary_id_check(ElementaryId which, const Complex& x, long n, const QBase& base,
                         const EvalContext& ctx) {
  mpfr_prec_t p = ctx.bits();
  const Complex& q = base.q;
  BoundedValue xv = BoundedValue::exact(x);
  BoundedValue qv = BoundedValue::exact(q);
  // (-1)^n x^n with the sign folded in.
  BoundedValue sxn = bv_powi(bv_neg(xv), n);

  BoundedValue lhs(Complex::one(p), ctx.zero());
  BoundedValue rhs(Complex::one(p), ctx.zero());
  switch (which) {
    case ElementaryId::tail_norm_2n: {
      Complex arg = x * powi(q, -2 * n);
      lhs = bv_div(poch_inf(arg, base, ctx), poch_int_guarded(arg, n, base, ctx));
      rhs = bv_mul(bv_mul(sxn, bv_powi(qv, -(n * n + n) / 2)),
                   bv_mul(poch_int(q / x, n, base, ctx), poch_inf(x, base, ctx)));
      break;
    }
    case ElementaryId::reversal_2n: {
      Complex arg = x * powi(q, -2 * n);
      lhs = poch_int(arg, n, base, ctx);
      rhs = bv_mul(bv_mul(sxn, bv_powi(qv, -(3 * n * n + n) / 2)),
                   poch_int(powi(q, n + 1) / x, n, base, ctx));
      break;
    }
    case ElementaryId::reversal_n: {
      Complex arg = x * powi(q, -n);
      lhs = poch_int(arg, n, base, ctx);
      rhs = bv_mul(bv_mul(sxn, bv_powi(qv, -(n * n + n) / 2)),
                   poch_int(q / x, n, base, ctx));
      break;
    }
  }
  return residual_of(lhs, rhs, ctx);
}

}  // namespace qpsi
