#pragma once

#include <span>
#include <vector>

#include "qpsi/mpnum.hpp"

namespace qpsi {

// Base q of all products and series, fixed with 0 < |q| < 1.
struct QBase {
  Complex q;

  static QBase make(Complex q_in) {
    if (!q_in.is_finite()) throw ConfigError("QBase: q must be finite");
    Real hi = q_in.abs_up();
    Real lo = q_in.abs_down();
    mpfr_prec_t p = q_in.prec();
    if (!(lo > Real::of_long(0, p)) || !(hi < Real::of_long(1, p))) {
      throw ConfigError("QBase: require 0 < |q| < 1");
    }
    return QBase{std::move(q_in)};
  }
};

enum class PochIndexKind { finite_nonneg, finite_neg, infinite };

// (a;q)_k for integer or infinite k, with certified error (including the
// truncation tail for the infinite product).
struct PochValue : BoundedValue {
  PochIndexKind index_kind = PochIndexKind::finite_nonneg;

  PochValue() = default;
  PochValue(BoundedValue bv, PochIndexKind kind)
      : BoundedValue(std::move(bv)), index_kind(kind) {}
};

// (a;q)_inf = prod_{j>=0} (1 - a q^j), truncated once the remaining factors
// perturb the product by less than ctx.eps_term (relative); the tail enters
// abs_err as a rigorous bound.
PochValue poch_inf(const Complex& a, const QBase& base, const EvalContext& ctx);

// (a;q)_k for any integer k. k >= 0 is the plain finite product; k < 0 is
// 1 / prod_{j=1..-k} (1 - a q^-j) and raises PoleError when a factor comes
// within pole_distance_min of zero.
PochValue poch_int(const Complex& a, long k, const QBase& base, const EvalContext& ctx);

// As poch_int, but every factor is pole-guarded (for use when the result
// will sit in a denominator).
PochValue poch_int_guarded(const Complex& a, long k, const QBase& base, const EvalContext& ctx);

// (a_1,...,a_m;q)_k = prod_i (a_i;q)_k.
PochValue poch_multi(std::span<const Complex> params, long k, const QBase& base,
                     const EvalContext& ctx);
PochValue poch_multi_inf(std::span<const Complex> params, const QBase& base,
                         const EvalContext& ctx);

// The three elementary q-shifted-factorial simplification laws used to
// normalize deep negative shifts:
//   tail_norm_2n : (x q^-2n)_inf / (x q^-2n)_n = (-1)^n x^n q^-(n^2+n)/2 (q/x)_n (x)_inf
//   reversal_2n  : (x q^-2n)_n = (-1)^n x^n q^-(3n^2+n)/2 (q^{n+1}/x)_n
//   reversal_n   : (x q^-n)_n  = (-1)^n x^n q^-(n^2+n)/2 (q/x)_n
// Returns the symmetric relative residual between the two sides.
enum class ElementaryId { tail_norm_2n, reversal_2n, reversal_n };

Real elementary_id_check(ElementaryId which, const Complex& x, long n, const QBase& base,
                         const EvalContext& ctx);

}  // namespace qpsi
