#pragma once

#include <optional>
#include <span>
#include <vector>

#include "qpsi/qpoch.hpp"

namespace qpsi {

// A numerator/denominator entry of a basic hypergeometric series.
//
// A vwp_pair placed in a numerator list stands for the parameter pair
// (q sqrt(a), -q sqrt(a)) and in a denominator list for (sqrt(a), -sqrt(a)).
// The pairs always occur matched, so their joint contribution to term k is
// the square-root-free ratio (1 - a q^{2k}) / (1 - a); sqrt(a) itself is
// never evaluated.
struct ParamExpr {
  enum class Kind { plain, vwp_pair };
  Kind kind = Kind::plain;
  Complex value;

  static ParamExpr plain(Complex v) { return ParamExpr{Kind::plain, std::move(v)}; }
  static ParamExpr vwp(Complex base) { return ParamExpr{Kind::vwp_pair, std::move(base)}; }
};

// Lower summation bound: k >= 0 (unilateral s_phi_{s-1}, with the implicit
// (q)_k denominator factor), k >= -n (semi-finite), or all integers
// (bilateral s_psi_s).
enum class LowerBound { zero, minus_n, bilateral };

struct SeriesSpec {
  std::vector<ParamExpr> numer, denom;
  Complex z;
  LowerBound lower = LowerBound::zero;
  long n = 0;  // depth for lower == minus_n
  QBase base;

  // Throws std::invalid_argument on malformed specs (unmatched vwp pairs,
  // negative n, zero bilateral argument).
  void validate() const;
};

struct EvalResult {
  BoundedValue value;
  long terms_up = 0;
  long terms_down = 0;
  Real tail_bound;
  bool converged = false;
};

// One-step term ratio t_{k+1}/t_k evaluated from scratch at index k.
BoundedValue term_ratio(const SeriesSpec& spec, long k, const EvalContext& ctx);

// Term t_k by the direct Pochhammer-quotient route (auxiliary / oracle path;
// the evaluator itself uses the O(1)-per-term ratio recurrence).
// Structurally zero terms (k below the series support) come back exactly 0.
BoundedValue term_at(const SeriesSpec& spec, long k, const EvalContext& ctx);

// Sum the series with certified truncation tails. Each direction stops only
// after 8 consecutive negligible terms AND a certified geometric tail bound;
// the tail enters value.abs_err. Throws NoConvergence / PoleError.
EvalResult eval_series(const SeriesSpec& spec, const EvalContext& ctx);

// The index-shift engine: sum_{k>=0} a(k) = C * sum_{k>=-n} a'(k) where a'
// is `spec` with every plain parameter p -> p q^n, every vwp base a -> a q^{2n},
// and the implicit (q)_k materialized as an explicit (q^{1+n})_k denominator.
struct ShiftedSeries {
  SeriesSpec spec;        // lower == minus_n
  BoundedValue prefactor; // C
};
ShiftedSeries shift_semi_finite(const SeriesSpec& spec, long n, const EvalContext& ctx);

// Evaluates both routes of the shift identity independently and returns their
// symmetric relative residual.
Real verify_shift_invariance(const SeriesSpec& spec, long n, const EvalContext& ctx);

// Convenience builders for the very-well-poised shapes used throughout.
//
// wp_phi: unilateral  [sigma, q√sigma, -q√sigma, rest... ; √sigma, -√sigma, sigma q/rest...]
// wp_psi: bilateral   [q√a, -q√a, params... ; √a, -√a, a q/params...]
SeriesSpec wp_phi(const Complex& sigma, std::span<const Complex> rest, const Complex& z,
                  const QBase& base);
SeriesSpec wp_psi(const Complex& a, std::span<const Complex> params, const Complex& z,
                  const QBase& base);

}  // namespace qpsi
