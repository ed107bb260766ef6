#include "qpsi/qseries.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace qpsi {

namespace {

BoundedValue one_bv(mpfr_prec_t p) { return BoundedValue::exact(Complex::one(p)); }

std::vector<Real> sorted_abs(const std::vector<ParamExpr>& ps, ParamExpr::Kind kind) {
  std::vector<Real> out;
  for (const auto& p : ps) {
    if (p.kind == kind) out.push_back(p.value.abs_n());
  }
  std::sort(out.begin(), out.end(), [](const Real& a, const Real& b) { return a < b; });
  return out;
}

}  // namespace

void SeriesSpec::validate() const {
  if (n < 0) throw std::invalid_argument("SeriesSpec: n must be nonnegative");
  if (lower != LowerBound::minus_n && n != 0) {
    throw std::invalid_argument("SeriesSpec: n only applies to lower == minus_n");
  }
  // vwp pairs must occur matched (same base multiset on both sides).
  auto nv = sorted_abs(numer, ParamExpr::Kind::vwp_pair);
  auto dv = sorted_abs(denom, ParamExpr::Kind::vwp_pair);
  if (nv.size() != dv.size()) {
    throw std::invalid_argument("SeriesSpec: unmatched vwp pair between numerator and denominator");
  }
  for (std::size_t i = 0; i < nv.size(); ++i) {
    if (!(nv[i] == dv[i])) {
      throw std::invalid_argument("SeriesSpec: vwp pair bases differ between numerator and denominator");
    }
  }
  if (lower == LowerBound::bilateral && z.is_zero()) {
    throw std::invalid_argument("SeriesSpec: bilateral series needs z != 0");
  }
}

namespace {

// Incremental term stepper. Maintains w = p q^k per plain parameter and
// v = a q^{2k} per vwp base, so each step costs O(#params) operations.
class Stepper {
 public:
  Stepper(const SeriesSpec& spec, const EvalContext& ctx, long k0, BoundedValue t0)
      : spec_(spec),
        ctx_(ctx),
        qv_(BoundedValue::exact(spec.base.q)),
        q2_(bv_mul(qv_, qv_)),
        zv_(BoundedValue::exact(spec.z)),
        t_(std::move(t0)),
        k_(k0) {
    BoundedValue qk = bv_powi(qv_, k0);
    BoundedValue q2k = bv_mul(qk, qk);
    for (const auto& p : spec.numer) {
      if (p.kind == ParamExpr::Kind::plain)
        wn_.push_back(bv_mul(BoundedValue::exact(p.value), qk));
      else
        wv_.push_back(bv_mul(BoundedValue::exact(p.value), q2k));
    }
    for (const auto& p : spec.denom) {
      if (p.kind == ParamExpr::Kind::plain)
        wd_.push_back(bv_mul(BoundedValue::exact(p.value), qk));
    }
    if (spec.lower == LowerBound::zero) {
      wq_ = bv_mul(qv_, qk);  // q^{k+1}
      has_implicit_q_ = true;
    }
  }

  const BoundedValue& term() const { return t_; }
  long index() const { return k_; }

  // t_{k+1} = t_k * z * prod(1 - a q^k) / prod(1 - b q^k) * vwp...
  void step_up() {
    mpfr_prec_t p = ctx_.bits();
    BoundedValue r = zv_;
    for (auto& w : wn_) {
      r = bv_mul(r, bv_sub(one_bv(p), w));
      w = bv_mul(w, qv_);
    }
    for (std::size_t i = 0; i < wd_.size(); ++i) {
      BoundedValue f = bv_sub(one_bv(p), wd_[i]);
      guard_divisor(f, "denominator parameter", i);
      r = bv_div(r, f);
      wd_[i] = bv_mul(wd_[i], qv_);
    }
    for (auto& v : wv_) {
      BoundedValue den = bv_sub(one_bv(p), v);
      guard_divisor(den, "vwp pair", 0);
      v = bv_mul(v, q2_);
      r = bv_mul(r, bv_div(bv_sub(one_bv(p), v), den));
    }
    if (has_implicit_q_) {
      BoundedValue f = bv_sub(one_bv(p), wq_);
      guard_divisor(f, "implicit (q)_k factor", 0);
      r = bv_div(r, f);
      wq_ = bv_mul(wq_, qv_);
    }
    t_ = bv_mul(t_, r);
    ++k_;
  }

  // t_{k-1} = t_k * prod(1 - b q^{k-1}) / (z * prod(1 - a q^{k-1})) * vwp...
  void step_down() {
    mpfr_prec_t p = ctx_.bits();
    BoundedValue r = one_bv(p);
    for (auto& w : wd_) {
      w = bv_div(w, qv_);
      r = bv_mul(r, bv_sub(one_bv(p), w));
    }
    for (std::size_t i = 0; i < wn_.size(); ++i) {
      wn_[i] = bv_div(wn_[i], qv_);
      BoundedValue f = bv_sub(one_bv(p), wn_[i]);
      guard_divisor(f, "numerator parameter (downward)", i);
      r = bv_div(r, f);
    }
    for (auto& v : wv_) {
      v = bv_div(v, q2_);
      BoundedValue den = bv_sub(one_bv(p), bv_mul(v, q2_));
      guard_divisor(den, "vwp pair (downward)", 0);
      r = bv_mul(r, bv_div(bv_sub(one_bv(p), v), den));
    }
    r = bv_div(r, zv_);
    t_ = bv_mul(t_, r);
    --k_;
  }

  // Certified sup of |t_{j+1}/t_j| over all j >= current index, or nullopt
  // when not yet certifiable.
  std::optional<Real> envelope_up() const {
    Real env = spec_.z.abs_up();
    Real one = ctx_.one();
    for (const auto& w : wn_) env = mul_up(env, add_up(one, bv_abs_up(w)));
    for (const auto& w : wd_) {
      Real d = sub_down(one, bv_abs_up(w));
      if (!(d > ctx_.zero())) return std::nullopt;
      env = div_up(env, d);
    }
    for (const auto& v : wv_) {
      Real vn = bv_abs_up(bv_mul(v, q2_));
      Real d = sub_down(one, bv_abs_up(v));
      if (!(d > ctx_.zero())) return std::nullopt;
      env = div_up(mul_up(env, add_up(one, vn)), d);
    }
    if (has_implicit_q_) {
      Real d = sub_down(one, bv_abs_up(wq_));
      if (!(d > ctx_.zero())) return std::nullopt;
      env = div_up(env, d);
    }
    return env;
  }

  // Certified sup of |t_{j-1}/t_j| over all j <= current index. Valid for
  // balanced bilateral specs: the q^{-m} growth of numerator and denominator
  // factors cancels exactly when the nonzero plain counts agree.
  std::optional<Real> envelope_down() const {
    Real q_up = spec_.base.q.abs_up();
    Real q_lo = spec_.base.q.abs_down();
    long m0 = 1 - k_;
    if (m0 < 1) m0 = 1;
    Real mu = pow_si_rnd(q_up, m0, MPFR_RNDU);  // >= |q|^m for every later step
    std::size_t n_nonzero = 0, d_nonzero = 0;
    Real num = ctx_.one();
    Real den = spec_.z.abs_down();
    if (!(den > ctx_.zero())) return std::nullopt;
    for (const auto& p : spec_.denom) {
      if (p.kind != ParamExpr::Kind::plain) continue;
      if (p.value.is_zero()) continue;
      ++d_nonzero;
      num = mul_up(num, add_up(p.value.abs_up(), mu));
    }
    for (const auto& p : spec_.numer) {
      if (p.kind != ParamExpr::Kind::plain) continue;
      if (p.value.is_zero()) continue;
      ++n_nonzero;
      Real d = sub_down(p.value.abs_down(), mu);
      if (!(d > ctx_.zero())) return std::nullopt;
      den = mul_down(den, d);
    }
    if (n_nonzero != d_nonzero) return std::nullopt;
    Real env = div_up(num, den);
    // vwp contribution: |q|^-2 (|a| + mu^2) / (|a| - mu^2/|q|^2) per pair.
    Real q2_lo = mul_down(q_lo, q_lo);
    Real kappa = div_up(mul_up(mu, mu), q2_lo);
    for (const auto& p : spec_.numer) {
      if (p.kind != ParamExpr::Kind::vwp_pair) continue;
      Real d = sub_down(p.value.abs_down(), kappa);
      if (!(d > ctx_.zero())) return std::nullopt;
      env = div_up(mul_up(env, add_up(p.value.abs_up(), mul_up(mu, mu))), mul_down(d, q2_lo));
    }
    return env;
  }

 private:
  void guard_divisor(const BoundedValue& f, const char* what, std::size_t i) const {
    if (f.value.abs_down() < ctx_.pole_distance_min()) {
      throw PoleError(std::string("term ratio: ") + what + " #" + std::to_string(i) +
                      " factor within pole_distance_min of zero at k=" + std::to_string(k_));
    }
  }

  const SeriesSpec& spec_;
  const EvalContext& ctx_;
  BoundedValue qv_, q2_, zv_;
  std::vector<BoundedValue> wn_, wd_, wv_;
  BoundedValue wq_;
  bool has_implicit_q_ = false;
  BoundedValue t_;
  long k_;
};

// Starting term for semi-finite evaluation, by the direct Pochhammer route.
BoundedValue initial_term(const SeriesSpec& spec, long k, const EvalContext& ctx) {
  mpfr_prec_t p = ctx.bits();
  BoundedValue t = bv_powi(BoundedValue::exact(spec.z), k);
  for (const auto& pe : spec.numer) {
    if (pe.kind == ParamExpr::Kind::plain) {
      t = bv_mul(t, poch_int(pe.value, k, spec.base, ctx));
    } else {
      // (1 - a q^{2k}) / (1 - a)
      BoundedValue num = bv_sub(one_bv(p), bv_mul(BoundedValue::exact(pe.value),
                                                  bv_powi(BoundedValue::exact(spec.base.q), 2 * k)));
      BoundedValue den = bv_sub(one_bv(p), BoundedValue::exact(pe.value));
      if (den.value.abs_down() < ctx.pole_distance_min()) {
        throw PoleError("term: vwp pair base within pole_distance_min of 1");
      }
      t = bv_mul(t, bv_div(num, den));
    }
  }
  for (const auto& pe : spec.denom) {
    if (pe.kind != ParamExpr::Kind::plain) continue;
    t = bv_div(t, poch_int_guarded(pe.value, k, spec.base, ctx));
  }
  if (spec.lower == LowerBound::zero) {
    t = bv_div(t, poch_int_guarded(spec.base.q, k, spec.base, ctx));
  }
  return t;
}

enum class Direction { up, down };

// Shared per-direction summation loop with the dual stopping rule.
// Returns the certified tail bound for the direction.
Real sum_direction(Stepper& st, BoundedValue& sum, long& count, Direction dir,
                   const EvalContext& ctx) {
  int small_run = 0;
  while (true) {
    if (count >= ctx.max_terms()) {
      throw NoConvergence(std::string("eval_series: max_terms exceeded (") +
                          (dir == Direction::up ? "upward" : "downward") + " direction)");
    }
    if (dir == Direction::up)
      st.step_up();
    else
      st.step_down();
    ++count;
    const BoundedValue& t = st.term();
    sum = bv_add(sum, t);
    if (t.exact_zero()) {
      // The recurrence is multiplicative: once a term is exactly zero, every
      // later term in this direction is exactly zero.
      return ctx.zero();
    }
    Real thresh = mul_down(ctx.eps_term(), sum.value.abs_down());
    if (bv_abs_up(t) < thresh) {
      ++small_run;
    } else {
      small_run = 0;
    }
    if (small_run >= 8) {
      auto env = (dir == Direction::up) ? st.envelope_up() : st.envelope_down();
      if (env && *env < ctx.one()) {
        Real tail = div_up(mul_up(bv_abs_up(t), *env), sub_down(ctx.one(), *env));
        if (tail < thresh) {
          sum.abs_err = add_up(sum.abs_err, tail);
          return tail;
        }
      }
    }
  }
}

}  // namespace

BoundedValue term_ratio(const SeriesSpec& spec, long k, const EvalContext& ctx) {
  spec.validate();
  Stepper st(spec, ctx, k, BoundedValue::exact(Complex::one(ctx.bits())));
  st.step_up();
  return st.term();
}

BoundedValue term_at(const SeriesSpec& spec, long k, const EvalContext& ctx) {
  spec.validate();
  if (spec.lower == LowerBound::zero && k < 0) {
    return BoundedValue::exact(Complex::zero(ctx.bits()));
  }
  if (spec.lower == LowerBound::minus_n && k < -spec.n) {
    // (q^{1+n})_k blows up for k < -n, killing the term structurally.
    return BoundedValue::exact(Complex::zero(ctx.bits()));
  }
  return initial_term(spec, k, ctx);
}

EvalResult eval_series(const SeriesSpec& spec, const EvalContext& ctx) {
  spec.validate();
  mpfr_prec_t p = ctx.bits();

  long k0 = 0;
  BoundedValue t0 = one_bv(p);
  if (spec.lower == LowerBound::minus_n && spec.n > 0) {
    k0 = -spec.n;
    t0 = initial_term(spec, k0, ctx);
  }

  EvalResult res;
  res.tail_bound = ctx.zero();
  BoundedValue sum = t0;

  Stepper up(spec, ctx, k0, t0);
  long terms_up = 1;  // t_{k0} itself
  Real tail_up = sum_direction(up, sum, terms_up, Direction::up, ctx);
  res.terms_up = terms_up;
  res.tail_bound = add_up(res.tail_bound, tail_up);

  if (spec.lower == LowerBound::bilateral) {
    Stepper down(spec, ctx, 0, one_bv(p));
    long terms_down = 0;
    Real tail_down = sum_direction(down, sum, terms_down, Direction::down, ctx);
    res.terms_down = terms_down;
    res.tail_bound = add_up(res.tail_bound, tail_down);
  }

  res.value = std::move(sum);
  res.converged = true;
  return res;
}

ShiftedSeries shift_semi_finite(const SeriesSpec& spec, long n, const EvalContext& ctx) {
  spec.validate();
  if (spec.lower != LowerBound::zero) {
    throw std::invalid_argument("shift_semi_finite: spec must have lower == zero");
  }
  if (n < 0) throw std::invalid_argument("shift_semi_finite: n must be nonnegative");
  mpfr_prec_t p = ctx.bits();
  const Complex& q = spec.base.q;
  Complex qn = powi(q, n);
  Complex q2n = qn * qn;

  SeriesSpec shifted;
  shifted.z = spec.z;
  shifted.base = spec.base;
  shifted.lower = LowerBound::minus_n;
  shifted.n = n;

  BoundedValue pref = bv_powi(BoundedValue::exact(spec.z), n);
  for (const auto& pe : spec.numer) {
    if (pe.kind == ParamExpr::Kind::plain) {
      shifted.numer.push_back(ParamExpr::plain(pe.value * qn));
      pref = bv_mul(pref, poch_int(pe.value, n, spec.base, ctx));
    } else {
      shifted.numer.push_back(ParamExpr::vwp(pe.value * q2n));
      // (q sqrt(a), -q sqrt(a))_n / (sqrt(a), -sqrt(a))_n = (1 - a q^{2n}) / (1 - a)
      BoundedValue num = bv_sub(one_bv(p), BoundedValue::exact(pe.value * q2n));
      BoundedValue den = bv_sub(one_bv(p), BoundedValue::exact(pe.value));
      pref = bv_mul(pref, bv_div(num, den));
    }
  }
  for (const auto& pe : spec.denom) {
    if (pe.kind == ParamExpr::Kind::plain) {
      shifted.denom.push_back(ParamExpr::plain(pe.value * qn));
      pref = bv_div(pref, poch_int_guarded(pe.value, n, spec.base, ctx));
    } else {
      shifted.denom.push_back(ParamExpr::vwp(pe.value * q2n));
    }
  }
  // implicit (q)_k -> explicit (q^{1+n})_k
  shifted.denom.push_back(ParamExpr::plain(q * qn));
  pref = bv_div(pref, poch_int_guarded(q, n, spec.base, ctx));

  return ShiftedSeries{std::move(shifted), std::move(pref)};
}

Real verify_shift_invariance(const SeriesSpec& spec, long n, const EvalContext& ctx) {
  EvalResult direct = eval_series(spec, ctx);
  ShiftedSeries sh = shift_semi_finite(spec, n, ctx);
  EvalResult shifted = eval_series(sh.spec, ctx);
  BoundedValue rhs = bv_mul(sh.prefactor, shifted.value);
  return residual_of(direct.value, rhs, ctx);
}

SeriesSpec wp_phi(const Complex& sigma, std::span<const Complex> rest, const Complex& z,
                  const QBase& base) {
  SeriesSpec s;
  s.base = base;
  s.z = z;
  s.lower = LowerBound::zero;
  s.numer.push_back(ParamExpr::plain(sigma));
  s.numer.push_back(ParamExpr::vwp(sigma));
  s.denom.push_back(ParamExpr::vwp(sigma));
  for (const auto& r : rest) {
    s.numer.push_back(ParamExpr::plain(r));
    s.denom.push_back(ParamExpr::plain(sigma * base.q / r));
  }
  return s;
}

SeriesSpec wp_psi(const Complex& a, std::span<const Complex> params, const Complex& z,
                  const QBase& base) {
  SeriesSpec s;
  s.base = base;
  s.z = z;
  s.lower = LowerBound::bilateral;
  s.numer.push_back(ParamExpr::vwp(a));
  s.denom.push_back(ParamExpr::vwp(a));
  for (const auto& pz : params) {
    s.numer.push_back(ParamExpr::plain(pz));
    s.denom.push_back(ParamExpr::plain(a * base.q / pz));
  }
  return s;
}

}  // namespace qpsi
