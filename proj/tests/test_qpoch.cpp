#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oracles.hpp"
#include "qpsi/qpoch.hpp"

using namespace qpsi;

namespace {

std::uint64_t splitmix(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
double uniform(std::uint64_t& s) { return static_cast<double>(splitmix(s) >> 11) * 0x1.0p-53; }

Real rel_diff(const BoundedValue& a, const Complex& b, const EvalContext& ctx) {
  return (a.value - b).abs_n() / (a.value.abs_n() + b.abs_n() + ctx.residual_floor());
}

}  // namespace

TEST_CASE("QBase validation") {
  EvalContext ctx = EvalContext::with_digits(50);
  CHECK_NOTHROW(QBase::make(ctx.complex(0.5)));
  CHECK_NOTHROW(QBase::make(ctx.complex(0.1, 0.3)));
  CHECK_THROWS_AS(QBase::make(ctx.complex(0.0)), ConfigError);
  CHECK_THROWS_AS(QBase::make(ctx.complex(1.0)), ConfigError);
  CHECK_THROWS_AS(QBase::make(ctx.complex(-1.2)), ConfigError);
}

TEST_CASE("poch_inf: a=0 gives exactly 1") {
  EvalContext ctx = EvalContext::with_digits(50);
  QBase base = QBase::make(ctx.complex(0.5));
  PochValue v = poch_inf(Complex::zero(ctx.bits()), base, ctx);
  CHECK(v.value.re.to_double() == 1.0);
  CHECK(v.value.im.is_zero());
  CHECK(v.abs_err.is_zero());
  CHECK(v.index_kind == PochIndexKind::infinite);
}

TEST_CASE("poch_inf (1/2;1/2)_inf against a 200-factor direct product at 60 digits") {
  EvalContext ctx = EvalContext::with_digits(50);
  EvalContext hi = EvalContext::with_digits(60);
  QBase base = QBase::make(ctx.complex(0.5));
  PochValue v = poch_inf(ctx.complex(0.5), base, ctx);
  Complex ref = oracle::poch_inf_direct(hi.complex(0.5), hi.complex(0.5), 200, hi.bits());
  // the truncated value must sit within its own certified bound of the truth
  CHECK((v.value - ref).abs_n() <= v.abs_err);
  CHECK(v.abs_err.to_double() < 1e-39);
  // known value sanity: (1/2;1/2)_inf = 0.2887880950866...
  CHECK(v.value.re.to_double() == doctest::Approx(0.28878809508660242).epsilon(1e-12));
}

TEST_CASE("poch_inf splitting cross-check: (a)_inf = (a)_k (a q^k)_inf") {
  EvalContext ctx = EvalContext::with_digits(50);
  QBase base = QBase::make(ctx.complex(0.35));
  Complex a = ctx.complex(0.8, 0.1);
  PochValue whole = poch_inf(a, base, ctx);
  for (long k : {1L, 3L, 7L}) {
    BoundedValue split = bv_mul(poch_int(a, k, base, ctx), poch_inf(a * powi(base.q, k), base, ctx));
    Real dist = (whole.value - split.value).abs_n();
    CHECK(dist <= ctx.real(10) * (whole.abs_err + split.abs_err));
  }
}

TEST_CASE("poch_int examples") {
  EvalContext ctx = EvalContext::with_digits(50);
  QBase base = QBase::make(ctx.complex(0.5));

  // (a)_0 = 1 for any a
  PochValue k0 = poch_int(ctx.complex(123.456), 0, base, ctx);
  CHECK(k0.value.re.to_double() == 1.0);
  CHECK(k0.abs_err.is_zero());

  // (0.3; 0.5)_{-2} = 1/((1-0.6)(1-1.2)) = -12.5
  PochValue neg = poch_int(ctx.complex("0.3"), -2, base, ctx);
  CHECK(neg.index_kind == PochIndexKind::finite_neg);
  CHECK(rel_diff(neg, ctx.complex("-12.5"), ctx).to_double() < 1e-55);

  // (q; q)_{-1} hits the exact pole 1 - q/q = 0
  CHECK_THROWS_AS(poch_int(ctx.complex(0.5), -1, base, ctx), PoleError);
}

TEST_CASE("poch_int nonnegative k against the direct oracle") {
  EvalContext ctx = EvalContext::with_digits(50);
  QBase base = QBase::make(ctx.complex(0.4));
  std::uint64_t s = 11;
  for (int rep = 0; rep < 20; ++rep) {
    Complex a = ctx.complex(uniform(s) * 1.6 - 0.8, uniform(s) * 0.6 - 0.3);
    long k = static_cast<long>(splitmix(s) % 12);
    PochValue v = poch_int(a, k, base, ctx);
    Complex ref = oracle::poch_direct(a, k, base.q, ctx.bits());
    CHECK((v.value - ref).abs_n().to_double() < 1e-55);
  }
}

TEST_CASE("quotient definition: (a)_k = (a)_inf / (a q^k)_inf for negative k") {
  EvalContext ctx = EvalContext::with_digits(50);
  QBase base = QBase::make(ctx.complex(0.3));
  std::uint64_t s = 21;
  int done = 0;
  while (done < 12) {
    Complex a = ctx.complex(0.15 + uniform(s) * 0.7);
    long k = -1 - static_cast<long>(splitmix(s) % 6);
    try {
      PochValue direct = poch_int(a, k, base, ctx);
      BoundedValue quotient =
          bv_div(poch_inf(a, base, ctx), poch_inf(a * powi(base.q, k), base, ctx));
      Real dist = (direct.value - quotient.value).abs_n();
      CHECK(dist <= ctx.real(10) * (direct.abs_err + quotient.abs_err));
      ++done;
    } catch (const PoleError&) {
      // a q^-j landed near 1; draw again
    } catch (const DivisionNearZero&) {
    }
  }
}

TEST_CASE("splitting law (a)_{k+m} = (a)_k (a q^k)_m over random integers") {
  EvalContext ctx = EvalContext::with_digits(50);
  QBase base = QBase::make(ctx.complex(0.45));
  std::uint64_t s = 31;
  int done = 0;
  while (done < 30) {
    Complex a = ctx.complex(0.1 + uniform(s) * 0.8);
    long k = static_cast<long>(splitmix(s) % 21) - 10;
    long m = static_cast<long>(splitmix(s) % 21) - 10;
    try {
      BoundedValue lhs = poch_int(a, k + m, base, ctx);
      BoundedValue rhs = bv_mul(poch_int(a, k, base, ctx),
                                poch_int(a * powi(base.q, k), m, base, ctx));
      Real dist = (lhs.value - rhs.value).abs_n();
      CHECK(dist <= ctx.real(10) * (lhs.abs_err + rhs.abs_err));
      ++done;
    } catch (const PoleError&) {
    }
  }
}

TEST_CASE("inversion: (a)_{-n} (a q^{-n})_n = 1") {
  EvalContext ctx = EvalContext::with_digits(50);
  QBase base = QBase::make(ctx.complex(0.25));
  std::uint64_t s = 41;
  int done = 0;
  while (done < 20) {
    Complex a = ctx.complex(0.1 + uniform(s) * 0.8);
    long n = 1 + static_cast<long>(splitmix(s) % 10);
    try {
      BoundedValue prod = bv_mul(poch_int(a, -n, base, ctx),
                                 poch_int(a * powi(base.q, -n), n, base, ctx));
      CHECK((prod.value - Complex::one(ctx.bits())).abs_n() <= ctx.real(10) * prod.abs_err);
      ++done;
    } catch (const PoleError&) {
    }
  }
}

TEST_CASE("poch_multi") {
  EvalContext ctx = EvalContext::with_digits(50);
  QBase base = QBase::make(ctx.complex(0.5));
  // empty list -> 1 exactly
  PochValue empty = poch_multi({}, 5, base, ctx);
  CHECK(empty.value.re.to_double() == 1.0);
  CHECK(empty.abs_err.is_zero());

  // singleton == poch_int
  Complex a = ctx.complex(0.6, 0.2);
  const Complex one_param[] = {a};
  PochValue single = poch_multi(one_param, 4, base, ctx);
  PochValue direct = poch_int(a, 4, base, ctx);
  CHECK((single.value - direct.value).abs_n().to_double() < 1e-55);

  // pair at infinity == product of poch_inf
  std::uint64_t s = 51;
  for (int rep = 0; rep < 10; ++rep) {
    Complex x = ctx.complex(uniform(s) * 0.8 + 0.1, uniform(s) * 0.4 - 0.2);
    Complex y = ctx.complex(uniform(s) * 0.8 + 0.1, uniform(s) * 0.4 - 0.2);
    const Complex params[] = {x, y};
    PochValue multi = poch_multi_inf(params, base, ctx);
    BoundedValue prod = bv_mul(poch_inf(x, base, ctx), poch_inf(y, base, ctx));
    Real dist = (multi.value - prod.value).abs_n();
    CHECK(dist <= ctx.real(10) * (multi.abs_err + prod.abs_err));
  }

  // pole index is reported
  const Complex with_pole[] = {ctx.complex(0.3), ctx.complex(0.5)};
  try {
    poch_multi(with_pole, -1, base, ctx);
    FAIL("expected PoleError");
  } catch (const PoleError& e) {
    CHECK(std::string(e.what()).find("parameter #1") != std::string::npos);
  }
}

TEST_CASE("elementary identities at n=1 reduce to algebra") {
  EvalContext ctx = EvalContext::with_digits(50);
  QBase base = QBase::make(ctx.complex(0.5));
  // reversal_n, n=1: (x/q)_1 = 1 - x/q vs -(x/q)(1 - q/x)
  Real r8 = elementary_id_check(ElementaryId::reversal_n, ctx.complex(0.7), 1, base, ctx);
  CHECK(r8.to_double() < 1e-60);
  // reversal_2n, n=1: (x/q^2)_1 = 1 - x/q^2 vs -x q^-2 (q^2/x)_1
  Real r7 = elementary_id_check(ElementaryId::reversal_2n, ctx.complex(0.7), 1, base, ctx);
  CHECK(r7.to_double() < 1e-60);
}

TEST_CASE("elementary identities randomized") {
  EvalContext ctx = EvalContext::with_digits(50);
  QBase base = QBase::make(ctx.complex(0.3));
  std::uint64_t s = 61;
  for (auto which :
       {ElementaryId::tail_norm_2n, ElementaryId::reversal_2n, ElementaryId::reversal_n}) {
    int done = 0;
    while (done < 20) {
      Complex x = ctx.complex(0.1 + uniform(s) * 0.8);
      long n = 1 + static_cast<long>(splitmix(s) % 10);
      try {
        Real resid = elementary_id_check(which, x, n, base, ctx);
        CHECK(resid.to_double() < 1e-40);
        ++done;
      } catch (const PoleError&) {
      } catch (const DivisionNearZero&) {
      }
    }
  }
}
