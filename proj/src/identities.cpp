#include "qpsi/identities.hpp"

#include <cmath>
#include <initializer_list>
#include <limits>
#include <stdexcept>

namespace qpsi {

std::string_view to_string(IdentityId id) {
  switch (id) {
    case IdentityId::SIXPSI6_SUM: return "SIXPSI6_SUM";
    case IdentityId::EIGHTPHI7_EXT: return "EIGHTPHI7_EXT";
    case IdentityId::SEMI_6PSI6: return "SEMI_6PSI6";
    case IdentityId::EIGHTPHI7_TRANS: return "EIGHTPHI7_TRANS";
    case IdentityId::SEMI_8PHI7: return "SEMI_8PHI7";
    case IdentityId::SIXPSI6_TRANS: return "SIXPSI6_TRANS";
    case IdentityId::TENPHI9_4TERM: return "TENPHI9_4TERM";
    case IdentityId::SEMI_10PHI9: return "SEMI_10PHI9";
    case IdentityId::EIGHTPSI8_TRANS: return "EIGHTPSI8_TRANS";
    case IdentityId::SIXPHI5_SUM: return "SIXPHI5_SUM";
    case IdentityId::ONEPSI1_SUM: return "ONEPSI1_SUM";
  }
  return "?";
}

std::optional<IdentityId> identity_from_string(std::string_view s) {
  for (const auto& info : identity_registry()) {
    if (to_string(info.id) == s) return info.id;
  }
  return std::nullopt;
}

const std::vector<IdentityInfo>& identity_registry() {
  static const std::vector<IdentityInfo> kRegistry = {
      {IdentityId::SIXPSI6_SUM, "SIXPSI6_SUM",
       "Bailey's very-well-poised 6psi6 bilateral summation (GR II.33)", "abcde", "", false,
       "|q a^2/(bcde)| < 1"},
      {IdentityId::EIGHTPHI7_EXT, "EIGHTPHI7_EXT",
       "Three-term nonterminating extension of Jackson's 8phi7 summation (GR II.25)", "acdef",
       "b", false, "b = q a^2/(cdef)"},
      {IdentityId::SEMI_6PSI6, "SEMI_6PSI6",
       "Semi-finite (k >= -n) form of the 6psi6 summation, three-term", "acdef", "b", true,
       "b = q a^2/(cdef)"},
      {IdentityId::EIGHTPHI7_TRANS, "EIGHTPHI7_TRANS",
       "Nonterminating very-well-poised 8phi7 transformation (GR III.23)", "abcdef", "", false,
       "lambda = q a^2/(bcd); |q^2 a^2/(bcdef)| < 1 and |a q/(ef)| < 1"},
      {IdentityId::SEMI_8PHI7, "SEMI_8PHI7",
       "Semi-finite (k >= -n) form of the 8phi7 transformation, two-term", "abcdef", "", true,
       "lambda = q a^2/(bcd); |q^2 a^2/(bcdef)| < 1 and |a q/(ef)| < 1"},
      {IdentityId::SIXPSI6_TRANS, "SIXPSI6_TRANS",
       "6psi6 -> 6psi6 transformation with an extra free parameter b", "abcdef", "", false,
       "lambda = q a^2/(bcd); |q a^2/(cdef)| < 1"},
      {IdentityId::TENPHI9_4TERM, "TENPHI9_4TERM",
       "Bailey's four-term very-well-poised 10phi9 transformation (GR III.39)", "abcdefg", "h",
       false, "h = q^2 a^3/(bcdefg); lambda = q a^2/(cde)"},
      {IdentityId::SEMI_10PHI9, "SEMI_10PHI9",
       "Semi-finite (k >= -n) form of the four-term 10phi9 transformation", "abdefgh", "c", true,
       "c = q^2 a^3/(bdefgh); lambda = q a^2/(cde)"},
      {IdentityId::EIGHTPSI8_TRANS, "EIGHTPSI8_TRANS",
       "8psi8 as an 8psi8 plus two 8phi7 series", "abdefgh", "c", false,
       "c = q^2 a^3/(bdefgh); lambda = q a^2/(cde); |c| < 1, |lambda c/a| < 1; lambda != a, b != a"},
      {IdentityId::SIXPHI5_SUM, "SIXPHI5_SUM",
       "Very-well-poised 6phi5 summation (GR II.20)", "abcd", "", false, "|a q/(bcd)| < 1"},
      {IdentityId::ONEPSI1_SUM, "ONEPSI1_SUM",
       "Ramanujan's 1psi1 summation (GR II.29); the letter c plays the argument z", "abc", "",
       false, "|b/a| < |z| < 1 with z = c"},
  };
  return kRegistry;
}

const IdentityInfo& identity_info(IdentityId id) {
  for (const auto& info : identity_registry()) {
    if (info.id == id) return info;
  }
  throw std::logic_error("identity_info: unknown id");
}

const Complex& ParamSet::letter(char name) const {
  switch (name) {
    case 'a': return a;
    case 'b': return b;
    case 'c': return c;
    case 'd': return d;
    case 'e': return e;
    case 'f': return f;
    case 'g': return g;
    case 'h': return h;
    default: throw std::invalid_argument("ParamSet::letter: unknown letter");
  }
}

Complex& ParamSet::letter(char name) {
  return const_cast<Complex&>(static_cast<const ParamSet&>(*this).letter(name));
}

// ---------------------------------------------------------------------------
// Product evaluation
// ---------------------------------------------------------------------------

BoundedValue eval_product(const ProductExpr& pe, const QBase& base, const EvalContext& ctx) {
  BoundedValue r = pe.scalar;
  for (const auto& fct : pe.numer) {
    r = bv_mul(r, fct.infinite ? poch_inf(fct.arg, base, ctx) : poch_int(fct.arg, fct.k, base, ctx));
  }
  for (const auto& fct : pe.denom) {
    r = bv_div(r, fct.infinite ? poch_inf(fct.arg, base, ctx)
                               : poch_int_guarded(fct.arg, fct.k, base, ctx));
  }
  return r;
}

// ---------------------------------------------------------------------------
// Instance builders. Single-letter locals mirror the displayed formulas;
// L stands for lambda and P(m) for q^m.
// ---------------------------------------------------------------------------

namespace {

void num_inf(ProductExpr& e, std::initializer_list<Complex> xs) {
  for (const auto& x : xs) e.numer.push_back({x, true, 0});
}
void den_inf(ProductExpr& e, std::initializer_list<Complex> xs) {
  for (const auto& x : xs) e.denom.push_back({x, true, 0});
}
void num_n(ProductExpr& e, long k, std::initializer_list<Complex> xs) {
  for (const auto& x : xs) e.numer.push_back({x, false, k});
}
void den_n(ProductExpr& e, long k, std::initializer_list<Complex> xs) {
  for (const auto& x : xs) e.denom.push_back({x, false, k});
}

ProductExpr unit_product(mpfr_prec_t p) {
  ProductExpr e;
  e.scalar = BoundedValue::exact(Complex::one(p));
  return e;
}

SeriesSpec raw_series(std::vector<ParamExpr> numer, std::vector<ParamExpr> denom, Complex z,
                      LowerBound lower, long n, const QBase& base) {
  SeriesSpec s;
  s.numer = std::move(numer);
  s.denom = std::move(denom);
  s.z = std::move(z);
  s.lower = lower;
  s.n = n;
  s.base = base;
  return s;
}

TermExpr series_term(std::string label, ProductExpr coeff, SeriesSpec series, bool skippable = false) {
  TermExpr t;
  t.label = std::move(label);
  t.coeff = std::move(coeff);
  t.series = std::move(series);
  t.skippable = skippable;
  return t;
}

TermExpr product_term(std::string label, ProductExpr coeff) {
  TermExpr t;
  t.label = std::move(label);
  t.coeff = std::move(coeff);
  return t;
}

using PE = ParamExpr;

IdentityInstance sixpsi6_sum(const ParamSet& S, const EvalContext& ctx) {
  mpfr_prec_t p = ctx.bits();
  const Complex &a = S.a, &b = S.b, &c = S.c, &d = S.d, &e = S.e, &q = S.base.q;
  Complex aq = a * q;
  Complex z = q * a * a / (b * c * d * e);

  IdentityInstance inst;
  const Complex params[] = {b, c, d, e};
  inst.lhs.push_back(series_term("lhs.6psi6", unit_product(p), wp_psi(a, params, z, S.base)));

  ProductExpr cf = unit_product(p);
  num_inf(cf, {q, aq, q / a, aq / (b * c), aq / (b * d), aq / (b * e), aq / (c * d), aq / (c * e),
               aq / (d * e)});
  den_inf(cf, {q / b, q / c, q / d, q / e, aq / b, aq / c, aq / d, aq / e, z});
  inst.rhs.push_back(product_term("rhs.closed-form", cf));
  return inst;
}

IdentityInstance sixphi5_sum(const ParamSet& S, const EvalContext& ctx) {
  mpfr_prec_t p = ctx.bits();
  const Complex &a = S.a, &b = S.b, &c = S.c, &d = S.d, &q = S.base.q;
  Complex aq = a * q;
  Complex z = aq / (b * c * d);

  IdentityInstance inst;
  const Complex rest[] = {b, c, d};
  inst.lhs.push_back(series_term("lhs.6phi5", unit_product(p), wp_phi(a, rest, z, S.base)));

  ProductExpr cf = unit_product(p);
  num_inf(cf, {aq, aq / (b * c), aq / (b * d), aq / (c * d)});
  den_inf(cf, {aq / b, aq / c, aq / d, z});
  inst.rhs.push_back(product_term("rhs.closed-form", cf));
  return inst;
}

IdentityInstance onepsi1_sum(const ParamSet& S, const EvalContext& ctx) {
  mpfr_prec_t p = ctx.bits();
  const Complex &a = S.a, &b = S.b, &z = S.c, &q = S.base.q;

  IdentityInstance inst;
  SeriesSpec s = raw_series({PE::plain(a)}, {PE::plain(b)}, z, LowerBound::bilateral, 0, S.base);
  inst.lhs.push_back(series_term("lhs.1psi1", unit_product(p), std::move(s)));

  ProductExpr cf = unit_product(p);
  num_inf(cf, {q, b / a, a * z, q / (a * z)});
  den_inf(cf, {b, q / a, z, b / (a * z)});
  inst.rhs.push_back(product_term("rhs.closed-form", cf));
  return inst;
}

IdentityInstance eightphi7_ext(const ParamSet& S, const EvalContext& ctx) {
  mpfr_prec_t p = ctx.bits();
  const Complex &a = S.a, &b = S.b, &c = S.c, &d = S.d, &e = S.e, &f = S.f, &q = S.base.q;
  Complex aq = a * q;

  IdentityInstance inst;
  const Complex rest[] = {b, c, d, e, f};
  inst.lhs.push_back(series_term("lhs.8phi7", unit_product(p), wp_phi(a, rest, q, S.base)));

  ProductExpr c1 = unit_product(p);
  c1.scalar = bv_div(BoundedValue::exact(b), BoundedValue::exact(a));
  num_inf(c1, {aq, c, d, e, f, b * q / a, b * q / c, b * q / d, b * q / e, b * q / f});
  den_inf(c1, {aq / b, aq / c, aq / d, aq / e, aq / f, b * c / a, b * d / a, b * e / a, b * f / a,
               b * b * q / a});
  const Complex rest1[] = {b, b * c / a, b * d / a, b * e / a, b * f / a};
  inst.rhs.push_back(
      series_term("rhs.b-term.8phi7", c1, wp_phi(b * b / a, rest1, q, S.base), /*skippable=*/true));

  ProductExpr c2 = unit_product(p);
  num_inf(c2, {aq, b / a, aq / (c * d), aq / (c * e), aq / (c * f), aq / (d * e), aq / (d * f),
               aq / (e * f)});
  den_inf(c2, {aq / c, aq / d, aq / e, aq / f, b * c / a, b * d / a, b * e / a, b * f / a});
  inst.rhs.push_back(product_term("rhs.product-term", c2));
  return inst;
}

IdentityInstance semi_6psi6(const ParamSet& S, const EvalContext& ctx) {
  mpfr_prec_t p = ctx.bits();
  const Complex &a = S.a, &b = S.b, &c = S.c, &d = S.d, &e = S.e, &f = S.f, &q = S.base.q;
  const long n = S.n;
  auto P = [&](long m) { return powi(q, m); };
  Complex aq = a * q;
  Complex qn = P(n);

  IdentityInstance inst;
  // sum_{k>=-n} (a q^-n, q√a, -q√a, b q^n, c, d, e, f)_k /
  //             (q^{1+n}, √a, -√a, a q^{1-n}/b, aq/c, aq/d, aq/e, aq/f)_k q^k
  SeriesSpec lhs = raw_series(
      {PE::plain(a * P(-n)), PE::vwp(a), PE::plain(b * qn), PE::plain(c), PE::plain(d),
       PE::plain(e), PE::plain(f)},
      {PE::plain(q * qn), PE::vwp(a), PE::plain(a * P(1 - n) / b), PE::plain(aq / c),
       PE::plain(aq / d), PE::plain(aq / e), PE::plain(aq / f)},
      q, LowerBound::minus_n, n, S.base);
  inst.lhs.push_back(series_term("lhs.semi-sum", unit_product(p), std::move(lhs)));

  ProductExpr c1 = unit_product(p);
  c1.scalar = bv_div(bv_powi(BoundedValue::exact(b), n + 1), BoundedValue::exact(a));
  num_inf(c1, {aq, c, d, e, f, b * q * qn * qn / a, b * q * qn / c, b * q * qn / d, b * q * qn / e,
               b * q * qn / f});
  den_inf(c1, {aq / b, aq / c, aq / d, aq / e, aq / f, b * c * qn / a, b * d * qn / a,
               b * e * qn / a, b * f * qn / a, b * b * q * qn * qn / a});
  num_n(c1, n, {q, q / a});
  den_n(c1, n, {b, b / a});
  const Complex rest1[] = {b, b * c * qn / a, b * d * qn / a, b * e * qn / a, b * f * qn / a};
  inst.rhs.push_back(series_term("rhs.b-term.8phi7", c1,
                                 wp_phi(b * b * qn * qn / a, rest1, q, S.base), /*skippable=*/true));

  ProductExpr c2 = unit_product(p);
  num_inf(c2, {aq, aq / (c * d), aq / (c * e), aq / (c * f), aq / (d * e), aq / (d * f),
               aq / (e * f), b * qn / a});
  den_inf(c2, {aq / c, aq / d, aq / e, aq / f, b * c * qn / a, b * d * qn / a, b * e * qn / a,
               b * f * qn / a});
  num_n(c2, n, {q, q / a});
  den_n(c2, n, {b, q / c, q / d, q / e, q / f});
  inst.rhs.push_back(product_term("rhs.product-term", c2));
  return inst;
}

IdentityInstance eightphi7_trans(const ParamSet& S, const EvalContext& ctx) {
  mpfr_prec_t p = ctx.bits();
  const Complex &a = S.a, &b = S.b, &c = S.c, &d = S.d, &e = S.e, &f = S.f, &L = S.lambda,
                &q = S.base.q;
  Complex aq = a * q;
  Complex z1 = q * q * a * a / (b * c * d * e * f);
  Complex z2 = aq / (e * f);

  IdentityInstance inst;
  const Complex rest[] = {b, c, d, e, f};
  inst.lhs.push_back(series_term("lhs.8phi7", unit_product(p), wp_phi(a, rest, z1, S.base)));

  ProductExpr cf = unit_product(p);
  num_inf(cf, {aq, aq / (e * f), L * q / e, L * q / f});
  den_inf(cf, {aq / e, aq / f, L * q / (e * f), L * q});
  const Complex rest1[] = {L * b / a, L * c / a, L * d / a, e, f};
  inst.rhs.push_back(series_term("rhs.8phi7", cf, wp_phi(L, rest1, z2, S.base)));
  return inst;
}

IdentityInstance semi_8phi7(const ParamSet& S, const EvalContext& ctx) {
  mpfr_prec_t p = ctx.bits();
  const Complex &a = S.a, &b = S.b, &c = S.c, &d = S.d, &e = S.e, &f = S.f, &L = S.lambda,
                &q = S.base.q;
  const long n = S.n;
  auto P = [&](long m) { return powi(q, m); };
  Complex aq = a * q;
  Complex qn = P(n);
  Complex z1 = q * q * a * a / (b * c * d * e * f);
  Complex z2 = aq / (e * f);

  IdentityInstance inst;
  SeriesSpec lhs = raw_series(
      {PE::plain(a * P(-n)), PE::vwp(a), PE::plain(b * qn), PE::plain(c), PE::plain(d),
       PE::plain(e), PE::plain(f)},
      {PE::plain(q * qn), PE::vwp(a), PE::plain(a * P(1 - n) / b), PE::plain(aq / c),
       PE::plain(aq / d), PE::plain(aq / e), PE::plain(aq / f)},
      z1, LowerBound::minus_n, n, S.base);
  inst.lhs.push_back(series_term("lhs.semi-sum", unit_product(p), std::move(lhs)));

  ProductExpr cf = unit_product(p);
  num_inf(cf, {aq, aq / (e * f), L * q / e, L * q / f});
  den_inf(cf, {aq / e, aq / f, L * q / (e * f), L * q});
  num_n(cf, n, {L * b / a, q / a, aq / (L * c), aq / (L * d)});
  den_n(cf, n, {b, q / L, q / c, q / d});
  SeriesSpec rhs = raw_series(
      {PE::plain(L * P(-n)), PE::vwp(L), PE::plain(L * b * qn / a), PE::plain(L * c / a),
       PE::plain(L * d / a), PE::plain(e), PE::plain(f)},
      {PE::plain(q * qn), PE::vwp(L), PE::plain(a * P(1 - n) / b), PE::plain(aq / c),
       PE::plain(aq / d), PE::plain(L * q / e), PE::plain(L * q / f)},
      z2, LowerBound::minus_n, n, S.base);
  inst.rhs.push_back(series_term("rhs.semi-sum", cf, std::move(rhs)));
  return inst;
}

IdentityInstance sixpsi6_trans(const ParamSet& S, const EvalContext& ctx) {
  mpfr_prec_t p = ctx.bits();
  const Complex &a = S.a, &b = S.b, &c = S.c, &d = S.d, &e = S.e, &f = S.f, &L = S.lambda,
                &q = S.base.q;
  Complex aq = a * q;
  Complex z = q * a * a / (c * d * e * f);

  IdentityInstance inst;
  const Complex params[] = {c, d, e, f};
  inst.lhs.push_back(series_term("lhs.6psi6", unit_product(p), wp_psi(a, params, z, S.base)));

  ProductExpr cf = unit_product(p);
  num_inf(cf, {aq, q / a, aq / (e * f), aq / (c * d), L * q / e, L * q / f, aq / (L * c),
               aq / (L * d)});
  den_inf(cf, {aq / e, aq / f, q / c, q / d, L * q, q / L, L * q / (e * f), b});
  const Complex params1[] = {L * c / a, L * d / a, e, f};
  inst.rhs.push_back(series_term("rhs.6psi6", cf, wp_psi(L, params1, z, S.base)));
  return inst;
}

IdentityInstance tenphi9_4term(const ParamSet& S, const EvalContext& ctx) {
  mpfr_prec_t p = ctx.bits();
  const Complex &a = S.a, &b = S.b, &c = S.c, &d = S.d, &e = S.e, &f = S.f, &g = S.g, &h = S.h,
                &L = S.lambda, &q = S.base.q;
  Complex aq = a * q;

  IdentityInstance inst;
  const Complex rest1[] = {b, c, d, e, f, g, h};
  inst.lhs.push_back(series_term("lhs.10phi9", unit_product(p), wp_phi(a, rest1, q, S.base)));

  ProductExpr c2 = unit_product(p);
  num_inf(c2, {aq, b / a, c, d, e, f, g, h, b * q / c, b * q / d, b * q / e, b * q / f, b * q / g,
               b * q / h});
  den_inf(c2, {b * b * q / a, a / b, aq / c, aq / d, aq / e, aq / f, aq / g, aq / h, b * c / a,
               b * d / a, b * e / a, b * f / a, b * g / a, b * h / a});
  const Complex rest2[] = {b, b * c / a, b * d / a, b * e / a, b * f / a, b * g / a, b * h / a};
  inst.lhs.push_back(series_term("lhs.b-term.10phi9", c2, wp_phi(b * b / a, rest2, q, S.base)));

  ProductExpr c3 = unit_product(p);
  num_inf(c3, {aq, b / a, L * q / f, L * q / g, L * q / h, b * f / L, b * g / L, b * h / L});
  den_inf(c3, {L * q, b / L, aq / f, aq / g, aq / h, b * f / a, b * g / a, b * h / a});
  const Complex rest3[] = {b, L * c / a, L * d / a, L * e / a, f, g, h};
  inst.rhs.push_back(series_term("rhs.lambda-term.10phi9", c3, wp_phi(L, rest3, q, S.base)));

  ProductExpr c4 = unit_product(p);
  num_inf(c4, {aq, b / a, f, g, h, b * q / f, b * q / g, b * q / h, L * c / a, L * d / a, L * e / a,
               a * b * q / (L * c), a * b * q / (L * d), a * b * q / (L * e)});
  den_inf(c4, {b * b * q / L, L / b, aq / c, aq / d, aq / e, aq / f, aq / g, aq / h, b * c / a,
               b * d / a, b * e / a, b * f / a, b * g / a, b * h / a});
  const Complex rest4[] = {b, b * c / a, b * d / a, b * e / a, b * f / L, b * g / L, b * h / L};
  inst.rhs.push_back(series_term("rhs.blambda-term.10phi9", c4, wp_phi(b * b / L, rest4, q, S.base)));
  return inst;
}

IdentityInstance semi_10phi9(const ParamSet& S, const EvalContext& ctx) {
  mpfr_prec_t p = ctx.bits();
  const Complex &a = S.a, &b = S.b, &c = S.c, &d = S.d, &e = S.e, &f = S.f, &g = S.g, &h = S.h,
                &L = S.lambda, &q = S.base.q;
  const long n = S.n;
  auto P = [&](long m) { return powi(q, m); };
  Complex aq = a * q;
  Complex qn = P(n);

  IdentityInstance inst;
  SeriesSpec s1 = raw_series(
      {PE::plain(a * P(-n)), PE::vwp(a), PE::plain(b), PE::plain(c * qn), PE::plain(d),
       PE::plain(e), PE::plain(f), PE::plain(g), PE::plain(h)},
      {PE::plain(q * qn), PE::vwp(a), PE::plain(aq / b), PE::plain(a * P(1 - n) / c),
       PE::plain(aq / d), PE::plain(aq / e), PE::plain(aq / f), PE::plain(aq / g),
       PE::plain(aq / h)},
      q, LowerBound::minus_n, n, S.base);
  inst.lhs.push_back(series_term("lhs.semi-sum", unit_product(p), std::move(s1)));

  ProductExpr ca = unit_product(p);
  ca.scalar = coeff_alpha(S, ctx);
  const Complex rest2[] = {b * P(-n), b * c * qn / a, b * d / a, b * e / a,
                           b * f / a, b * g / a,     b * h / a};
  inst.lhs.push_back(series_term("lhs.alpha-term.10phi9", ca, wp_phi(b * b / a, rest2, q, S.base)));

  ProductExpr cb = unit_product(p);
  cb.scalar = coeff_beta(S, ctx);
  SeriesSpec s3 = raw_series(
      {PE::plain(L * P(-n)), PE::vwp(L), PE::plain(b), PE::plain(L * c * qn / a),
       PE::plain(L * d / a), PE::plain(L * e / a), PE::plain(f), PE::plain(g), PE::plain(h)},
      {PE::plain(q * qn), PE::vwp(L), PE::plain(L * q / b), PE::plain(a * P(1 - n) / c),
       PE::plain(aq / d), PE::plain(aq / e), PE::plain(L * q / f), PE::plain(L * q / g),
       PE::plain(L * q / h)},
      q, LowerBound::minus_n, n, S.base);
  inst.rhs.push_back(series_term("rhs.beta-term.semi-sum", cb, std::move(s3)));

  ProductExpr cg = unit_product(p);
  cg.scalar = coeff_gamma(S, ctx);
  const Complex rest4[] = {b * P(-n), b * c * qn / a, b * d / a, b * e / a,
                           b * f / L, b * g / L,     b * h / L};
  inst.rhs.push_back(series_term("rhs.gamma-term.10phi9", cg, wp_phi(b * b / L, rest4, q, S.base)));
  return inst;
}

IdentityInstance eightpsi8_trans(const ParamSet& S, const EvalContext& ctx) {
  mpfr_prec_t p = ctx.bits();
  const Complex &a = S.a, &b = S.b, &c = S.c, &d = S.d, &e = S.e, &f = S.f, &g = S.g, &h = S.h,
                &L = S.lambda, &q = S.base.q;
  Complex aq = a * q;
  Complex zL = L * c / a;

  IdentityInstance inst;
  const Complex params1[] = {b, d, e, f, g, h};
  inst.lhs.push_back(series_term("lhs.8psi8", unit_product(p), wp_psi(a, params1, c, S.base)));

  ProductExpr c2 = unit_product(p);
  num_inf(c2, {aq, q / a, L * c / a, aq / (L * d), aq / (L * e), b / a, b * f / L, b * g / L,
               b * h / L, L * q / f, L * q / g, L * q / h});
  den_inf(c2, {L * q, q / L, c, q / d, q / e, b / L, b * f / a, b * g / a, b * h / a, aq / f,
               aq / g, aq / h});
  const Complex params2[] = {b, L * d / a, L * e / a, f, g, h};
  inst.rhs.push_back(series_term("rhs.lambda-term.8psi8", c2, wp_psi(L, params2, zL, S.base)));

  ProductExpr c3 = unit_product(p);
  c3.scalar = bv_div(BoundedValue::exact(b), BoundedValue::exact(a));
  num_inf(c3, {q, q / a, c / b, aq, b * q / c, b * q / d, b * q / e, b * q / f, b * q / g,
               b * q / h, d, e, f, g, h});
  den_inf(c3, {q / b, c / a, b * b * q / a, aq / b, aq / c, b * d / a, b * e / a, b * f / a,
               b * g / a, b * h / a, aq / d, aq / e, aq / f, aq / g, aq / h});
  const Complex rest3[] = {b * d / a, b * e / a, b * f / a, b * g / a, b * h / a};
  inst.rhs.push_back(series_term("rhs.b-term.8phi7", c3, wp_phi(b * b / a, rest3, c, S.base)));

  ProductExpr c4 = unit_product(p);
  num_inf(c4, {q, q / a, b / a, aq / (L * d), aq / (L * e), L * c / (a * b), aq, f, g, h,
               L * c / a, L * d / a, L * e / a, b * q / f, b * q / g, b * q / h, a * b * q / (L * c),
               a * b * q / (L * d), a * b * q / (L * e)});
  den_inf(c4, {c, c / a, q / b, q / d, q / e, q * b / L, b * b * q / L, aq / f, aq / g, aq / h,
               b * d / a, b * e / a, b * f / a, b * g / a, b * h / a, L / b, aq / c, aq / d,
               aq / e});
  const Complex rest4[] = {b * d / a, b * e / a, b * f / L, b * g / L, b * h / L};
  inst.rhs.push_back(series_term("rhs.blambda-term.8phi7", c4, wp_phi(b * b / L, rest4, zL, S.base)));
  return inst;
}

}  // namespace

BoundedValue coeff_alpha(const ParamSet& S, const EvalContext& ctx) {
  const Complex &a = S.a, &b = S.b, &c = S.c, &d = S.d, &e = S.e, &f = S.f, &g = S.g, &h = S.h,
                &q = S.base.q;
  const long n = S.n;
  Complex aq = a * q;
  Complex qn = powi(q, n);
  ProductExpr pe;
  pe.scalar = bv_neg(bv_div(BoundedValue::exact(b), BoundedValue::exact(a)));
  num_n(pe, n, {q, q / a, c / b});
  den_n(pe, n, {q / b, c / a});
  num_inf(pe, {b * q * qn / a, c * qn, aq, b * q / c, b * q / d, b * q / e, b * q / f, b * q / g,
               b * q / h, d, e, f, g, h});
  den_inf(pe, {b * c * qn / a, b * b * q / a, aq / b, aq / c, b * d / a, b * e / a, b * f / a,
               b * g / a, b * h / a, aq / d, aq / e, aq / f, aq / g, aq / h});
  return eval_product(pe, S.base, ctx);
}

BoundedValue coeff_beta(const ParamSet& S, const EvalContext& ctx) {
  const Complex &a = S.a, &b = S.b, &c = S.c, &d = S.d, &e = S.e, &f = S.f, &g = S.g, &h = S.h,
                &L = S.lambda, &q = S.base.q;
  const long n = S.n;
  Complex aq = a * q;
  Complex qn = powi(q, n);
  ProductExpr pe;
  pe.scalar = BoundedValue::exact(Complex::one(ctx.bits()));
  num_n(pe, n, {q / a, L * c / a, aq / (L * d), aq / (L * e), b / a});
  den_n(pe, n, {q / L, c, q / d, q / e, b / L});
  num_inf(pe, {aq, b * f / L, b * g / L, b * h / L, L * q / f, L * q / g, L * q / h, b * qn / a});
  den_inf(pe, {L * q, b * f / a, b * g / a, b * h / a, aq / f, aq / g, aq / h, b * qn / L});
  return eval_product(pe, S.base, ctx);
}

BoundedValue coeff_gamma(const ParamSet& S, const EvalContext& ctx) {
  const Complex &a = S.a, &b = S.b, &c = S.c, &d = S.d, &e = S.e, &f = S.f, &g = S.g, &h = S.h,
                &L = S.lambda, &q = S.base.q;
  const long n = S.n;
  Complex aq = a * q;
  Complex qn = powi(q, n);
  ProductExpr pe;
  pe.scalar = BoundedValue::exact(Complex::one(ctx.bits()));
  num_n(pe, n, {q, q / a, b / a, aq / (L * d), aq / (L * e), L * c / (a * b)});
  den_n(pe, n, {c, c / a, q / b, q / d, q / e, q * b / L});
  num_inf(pe, {b * qn / a, aq, f, g, h, L * c / a, L * d / a, L * e / a, b * q / f, b * q / g,
               b * q / h, a * b * q / (L * c), a * b * q / (L * d), a * b * q / (L * e)});
  den_inf(pe, {b * c * qn / a, b * b * q / L, aq / f, aq / g, aq / h, b * d / a, b * e / a,
               b * f / a, b * g / a, b * h / a, L / b, aq / c, aq / d, aq / e});
  return eval_product(pe, S.base, ctx);
}

IdentityInstance build_instance(IdentityId id, const ParamSet& ps, const EvalContext& ctx) {
  switch (id) {
    case IdentityId::SIXPSI6_SUM: return sixpsi6_sum(ps, ctx);
    case IdentityId::EIGHTPHI7_EXT: return eightphi7_ext(ps, ctx);
    case IdentityId::SEMI_6PSI6: return semi_6psi6(ps, ctx);
    case IdentityId::EIGHTPHI7_TRANS: return eightphi7_trans(ps, ctx);
    case IdentityId::SEMI_8PHI7: return semi_8phi7(ps, ctx);
    case IdentityId::SIXPSI6_TRANS: return sixpsi6_trans(ps, ctx);
    case IdentityId::TENPHI9_4TERM: return tenphi9_4term(ps, ctx);
    case IdentityId::SEMI_10PHI9: return semi_10phi9(ps, ctx);
    case IdentityId::EIGHTPSI8_TRANS: return eightpsi8_trans(ps, ctx);
    case IdentityId::SIXPHI5_SUM: return sixphi5_sum(ps, ctx);
    case IdentityId::ONEPSI1_SUM: return onepsi1_sum(ps, ctx);
  }
  throw std::logic_error("build_instance: unknown identity");
}

// ---------------------------------------------------------------------------
// Pole scan: every Pochhammer factor 1 - x q^j that the evaluation touches
// must stay at least pole_distance_min away from zero.
// ---------------------------------------------------------------------------

namespace {

constexpr long kScanUnbounded = std::numeric_limits<long>::max() / 4;

double log10_abs(const Complex& x) {
  Real t = x.abs_n();
  mpfr_t l;
  mpfr_init2(l, 64);
  mpfr_log10(l, t.raw(), MPFR_RNDN);
  double out = mpfr_get_d(l, MPFR_RNDN);
  mpfr_clear(l);
  return out;
}

// Check factors 1 - x q^j for all integer exponents j in [jlo, jhi].
void scan_arg(const Complex& x, long jlo, long jhi, const QBase& base, const EvalContext& ctx,
              const std::string& where) {
  if (x.is_zero()) return;
  double lx = log10_abs(x);
  double lq = log10_abs(Complex::of_real(base.q.abs_n()));
  // |x q^j| crosses 1 near j* = -lx/lq; only a narrow window can violate the
  // pole distance, since outside it |1 - x q^j| >= 1/2-ish.
  double jstar = -lx / lq;
  double width = 0.3010299957 / (-lq) + 3.0;
  long lo = static_cast<long>(std::floor(jstar - width));
  long hi = static_cast<long>(std::ceil(jstar + width));
  lo = std::max(lo, jlo);
  hi = std::min(hi, jhi);
  for (long j = lo; j <= hi; ++j) {
    Complex factor = Complex::one(ctx.bits()) - x * powi(base.q, j);
    if (factor.abs_down() < ctx.pole_distance_min()) {
      throw ConstraintViolation("pole proximity: |1 - x q^" + std::to_string(j) + "| < " +
                                "pole_distance_min in " + where);
    }
  }
}

void scan_product(const ProductExpr& pe, const QBase& base, const EvalContext& ctx,
                  const std::string& where) {
  auto scan_factor = [&](const PochFactor& fct) {
    if (fct.infinite) {
      scan_arg(fct.arg, 0, kScanUnbounded, base, ctx, where);
    } else if (fct.k >= 0) {
      scan_arg(fct.arg, 0, fct.k - 1, base, ctx, where);
    } else {
      scan_arg(fct.arg, fct.k, -1, base, ctx, where);
    }
  };
  for (const auto& fct : pe.numer) scan_factor(fct);
  for (const auto& fct : pe.denom) scan_factor(fct);
}

void scan_series(const SeriesSpec& spec, const EvalContext& ctx, const std::string& where) {
  long klo;
  switch (spec.lower) {
    case LowerBound::zero: klo = 0; break;
    case LowerBound::minus_n: klo = -spec.n; break;
    case LowerBound::bilateral: klo = -kScanUnbounded; break;
  }
  for (const auto& pe : spec.numer) {
    if (pe.kind == ParamExpr::Kind::plain) {
      scan_arg(pe.value, klo, kScanUnbounded, spec.base, ctx, where);
    } else {
      scan_arg(pe.value, 2 * klo, kScanUnbounded, spec.base, ctx, where + " (vwp)");
    }
  }
  for (const auto& pe : spec.denom) {
    if (pe.kind == ParamExpr::Kind::plain) {
      scan_arg(pe.value, klo, kScanUnbounded, spec.base, ctx, where);
    }
  }
}

void scan_instance(const IdentityInstance& inst, const QBase& base, const EvalContext& ctx) {
  auto scan_terms = [&](const std::vector<TermExpr>& terms) {
    for (const auto& t : terms) {
      scan_product(t.coeff, base, ctx, t.label);
      if (t.series) scan_series(*t.series, ctx, t.label);
    }
  };
  scan_terms(inst.lhs);
  scan_terms(inst.rhs);
}

void require_modulus_lt1(const Complex& v, const char* name, const EvalContext& ctx) {
  if (!(v.abs_up() < ctx.one())) {
    throw ConstraintViolation(std::string("convergence modulus violated: |") + name + "| >= 1");
  }
}

void require_nonzero_letters(const ParamSet& ps, std::string_view letters) {
  for (char ch : letters) {
    if (ps.letter(ch).is_zero() || !ps.letter(ch).is_finite()) {
      throw ConstraintViolation(std::string("free parameter '") + ch + "' must be finite and nonzero");
    }
  }
}

}  // namespace

ParamSet solve_constraints(IdentityId id, const ParamSet& partial, const EvalContext& ctx) {
  const IdentityInfo& info = identity_info(id);
  ParamSet ps = partial;
  if (ps.n < 0) throw ConstraintViolation("n must be nonnegative");
  if (!info.semi_finite) ps.n = 0;
  require_nonzero_letters(ps, info.free_letters);

  const Complex& q = ps.base.q;
  switch (id) {
    case IdentityId::SIXPSI6_SUM:
      require_modulus_lt1(q * ps.a * ps.a / (ps.b * ps.c * ps.d * ps.e), "q a^2/(bcde)", ctx);
      break;
    case IdentityId::SIXPHI5_SUM:
      require_modulus_lt1(ps.a * q / (ps.b * ps.c * ps.d), "a q/(bcd)", ctx);
      break;
    case IdentityId::ONEPSI1_SUM: {
      require_modulus_lt1(ps.c, "z", ctx);
      if (!((ps.b / ps.a).abs_up() < ps.c.abs_down())) {
        throw ConstraintViolation("convergence modulus violated: need |b/a| < |z|");
      }
      break;
    }
    case IdentityId::EIGHTPHI7_EXT:
    case IdentityId::SEMI_6PSI6:
      ps.b = q * ps.a * ps.a / (ps.c * ps.d * ps.e * ps.f);
      break;
    case IdentityId::EIGHTPHI7_TRANS:
    case IdentityId::SEMI_8PHI7:
      ps.lambda = q * ps.a * ps.a / (ps.b * ps.c * ps.d);
      require_modulus_lt1(q * q * ps.a * ps.a / (ps.b * ps.c * ps.d * ps.e * ps.f),
                          "q^2 a^2/(bcdef)", ctx);
      require_modulus_lt1(ps.a * q / (ps.e * ps.f), "a q/(ef)", ctx);
      break;
    case IdentityId::SIXPSI6_TRANS:
      ps.lambda = q * ps.a * ps.a / (ps.b * ps.c * ps.d);
      require_modulus_lt1(q * ps.a * ps.a / (ps.c * ps.d * ps.e * ps.f), "q a^2/(cdef)", ctx);
      break;
    case IdentityId::TENPHI9_4TERM:
      ps.h = q * q * ps.a * ps.a * ps.a / (ps.b * ps.c * ps.d * ps.e * ps.f * ps.g);
      ps.lambda = q * ps.a * ps.a / (ps.c * ps.d * ps.e);
      break;
    case IdentityId::SEMI_10PHI9:
    case IdentityId::EIGHTPSI8_TRANS: {
      ps.c = q * q * ps.a * ps.a * ps.a / (ps.b * ps.d * ps.e * ps.f * ps.g * ps.h);
      ps.lambda = q * ps.a * ps.a / (ps.c * ps.d * ps.e);
      if (id == IdentityId::EIGHTPSI8_TRANS) {
        require_modulus_lt1(ps.c, "c", ctx);
        require_modulus_lt1(ps.lambda * ps.c / ps.a, "lambda c/a", ctx);
        if ((ps.lambda - ps.a).abs_down() < ctx.pole_distance_min()) {
          throw ConstraintViolation("degenerate case: lambda = a makes the identity trivial");
        }
        if ((ps.b - ps.a).abs_down() < ctx.pole_distance_min()) {
          throw ConstraintViolation("degenerate case: b = a makes the identity trivial");
        }
      }
      break;
    }
  }

  IdentityInstance inst = build_instance(id, ps, ctx);
  scan_instance(inst, ps.base, ctx);
  return ps;
}

// ---------------------------------------------------------------------------
// Checking
// ---------------------------------------------------------------------------

IdentityReport check_identity(IdentityId id, const ParamSet& ps, const EvalContext& ctx) {
  return check_identity(id, ps, ctx, Real::parse("1e-30", ctx.bits()));
}

IdentityReport check_identity(IdentityId id, const ParamSet& ps, const EvalContext& ctx,
                              const Real& tolerance) {
  IdentityInstance inst = build_instance(id, ps, ctx);
  IdentityReport rep;
  rep.identity = id;
  rep.params = ps;
  rep.residual = ctx.zero();
  rep.lhs = BoundedValue::exact(Complex::zero(ctx.bits()));
  rep.rhs = BoundedValue::exact(Complex::zero(ctx.bits()));

  auto eval_side = [&](const std::vector<TermExpr>& terms, BoundedValue& out) -> bool {
    out = BoundedValue::exact(Complex::zero(ctx.bits()));
    for (const auto& t : terms) {
      BoundedValue v;
      try {
        v = eval_product(t.coeff, ps.base, ctx);
        if (t.series) {
          EvalResult er = eval_series(*t.series, ctx);
          ComponentStats cs;
          cs.label = t.label;
          cs.is_series = true;
          cs.terms_up = er.terms_up;
          cs.terms_down = er.terms_down;
          cs.tail_bound = er.tail_bound;
          cs.abs_err = er.value.abs_err;
          cs.converged = er.converged;
          rep.diagnostics.push_back(std::move(cs));
          v = bv_mul(v, er.value);
        }
      } catch (const NoConvergence& ex) {
        if (t.skippable) {
          rep.skipped = true;
          rep.skip_reason = t.label + ": " + ex.what();
          return false;
        }
        throw NoConvergence(std::string(to_string(id)) + " " + t.label + ": " + ex.what());
      } catch (const PoleError& ex) {
        throw PoleError(std::string(to_string(id)) + " " + t.label + ": " + ex.what());
      }
      out = bv_add(out, v);
    }
    return true;
  };

  if (!eval_side(inst.lhs, rep.lhs)) return rep;
  if (!eval_side(inst.rhs, rep.rhs)) return rep;

  rep.residual = residual_of(rep.lhs, rep.rhs, ctx);
  Real den = rep.lhs.value.abs_n() + rep.rhs.value.abs_n() + ctx.residual_floor();
  Real explained = ctx.real(10L) * (rep.lhs.abs_err + rep.rhs.abs_err) / den;
  rep.pass = (rep.residual <= tolerance) && (rep.residual <= explained);
  return rep;
}

}  // namespace qpsi
