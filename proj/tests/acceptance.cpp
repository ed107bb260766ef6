// Acceptance suite: one criterion per section, one [PASS]/[FAIL] line each.
// Exit code 0 iff every criterion holds. Individual criteria can be selected
// by number on the command line: ./acceptance 3 7

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "qpsi/harness.hpp"

using namespace qpsi;

namespace {

struct Checker {
  std::vector<std::string> failures;
  long checks = 0;

  void require(bool ok, const std::string& msg) {
    ++checks;
    if (!ok) failures.push_back(msg);
  }
};

std::uint64_t splitmix(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}
double uniform(std::uint64_t& s) { return static_cast<double>(splitmix(s) >> 11) * 0x1.0p-53; }

double residual_between(const BoundedValue& l, const BoundedValue& r, const EvalContext& ctx) {
  return residual_of(l, r, ctx).to_double();
}

void summarize_sweep(Checker& ck, const SweepResult& r, double tol, const char* label,
                     double max_skip_fraction = 0.0) {
  ck.require(r.summary.failures == 0,
             std::string(label) + ": " + std::to_string(r.summary.failures) + " residual failures");
  ck.require(r.summary.max_residual.to_double() <= tol,
             std::string(label) + ": max residual " + r.summary.max_residual.to_string(6) +
                 " above tolerance");
  double skip_frac = r.summary.samples == 0
                         ? 0.0
                         : static_cast<double>(r.summary.skips) / static_cast<double>(r.summary.samples);
  ck.require(skip_frac <= max_skip_fraction,
             std::string(label) + ": skip fraction " + std::to_string(skip_frac) + " above bound");
  ck.require(r.summary.passes + r.summary.skips == r.summary.samples,
             std::string(label) + ": pass/skip accounting broken");
}

SweepConfig base_config(IdentityId id, long samples, std::uint64_t seed, double tolerance) {
  SweepConfig cfg;
  cfg.identity = id;
  cfg.samples = samples;
  cfg.seed = seed;
  cfg.tolerance = tolerance;
  cfg.max_terms = 100000;  // headroom for draws with |z| close to 1
  cfg.jobs = 4;
  return cfg;
}

// --------------------------------------------------------------------------
// 1. Pochhammer algebra: splitting, inversion, and the three elementary
//    identities, 200 randomized cases each, residual <= 1e-40 at 50 digits.
// --------------------------------------------------------------------------
void criterion1(Checker& ck) {
  EvalContext ctx = EvalContext::with_digits(50).with_eps_exp(50);
  std::uint64_t s = 1001;
  auto draw_q = [&](double lo = 0.05, double hi = 0.5) { return lo + uniform(s) * (hi - lo); };
  auto draw_x = [&]() { return 0.1 + uniform(s) * 0.8; };

  int done = 0;
  while (done < 200) {
    QBase base = QBase::make(ctx.complex(draw_q()));
    Complex a = ctx.complex(draw_x());
    long k = static_cast<long>(splitmix(s) % 21) - 10;
    long m = static_cast<long>(splitmix(s) % 21) - 10;
    try {
      BoundedValue lhs = poch_int(a, k + m, base, ctx);
      BoundedValue rhs = bv_mul(poch_int(a, k, base, ctx), poch_int(a * powi(base.q, k), m, base, ctx));
      ck.require(residual_between(lhs, rhs, ctx) <= 1e-40, "splitting law residual above 1e-40");
      ++done;
    } catch (const PoleError&) {
    }
  }
  done = 0;
  while (done < 200) {
    QBase base = QBase::make(ctx.complex(draw_q()));
    Complex a = ctx.complex(draw_x());
    long n = 1 + static_cast<long>(splitmix(s) % 20);
    try {
      BoundedValue prod =
          bv_mul(poch_int(a, -n, base, ctx), poch_int(a * powi(base.q, -n), n, base, ctx));
      BoundedValue one = BoundedValue::exact(Complex::one(ctx.bits()));
      ck.require(residual_between(prod, one, ctx) <= 1e-40, "inversion residual above 1e-40");
      ++done;
    } catch (const PoleError&) {
    }
  }
  for (ElementaryId which_id :
       {ElementaryId::tail_norm_2n, ElementaryId::reversal_2n, ElementaryId::reversal_n}) {
    done = 0;
    while (done < 200) {
      QBase base = QBase::make(ctx.complex(draw_q()));
      Complex x = ctx.complex(draw_x());
      long n = 1 + static_cast<long>(splitmix(s) % 20);
      try {
        Real resid = elementary_id_check(which_id, x, n, base, ctx);
        ck.require(resid.to_double() <= 1e-40, "elementary identity residual above 1e-40");
        ++done;
      } catch (const PoleError&) {
      } catch (const DivisionNearZero&) {
      }
    }
  }
}

// --------------------------------------------------------------------------
// 2. Closed-form sums: 6phi5 and 1psi1, 50 samples each, residual <= 1e-35.
// --------------------------------------------------------------------------
void criterion2(Checker& ck) {
  SweepResult r1 = run_sweep(base_config(IdentityId::SIXPHI5_SUM, 50, 2001, 1e-35));
  summarize_sweep(ck, r1, 1e-35, "SIXPHI5_SUM");
  SweepResult r2 = run_sweep(base_config(IdentityId::ONEPSI1_SUM, 50, 2002, 1e-35));
  summarize_sweep(ck, r2, 1e-35, "ONEPSI1_SUM");
}

// --------------------------------------------------------------------------
// 3. Bailey 6psi6: 50 samples, residual <= 1e-35; e = a degeneration matches
//    the 6phi5 closed form on 10 samples.
// --------------------------------------------------------------------------
void criterion3(Checker& ck) {
  SweepResult r = run_sweep(base_config(IdentityId::SIXPSI6_SUM, 50, 3001, 1e-35));
  summarize_sweep(ck, r, 1e-35, "SIXPSI6_SUM");

  EvalContext ctx = EvalContext::with_digits(50);
  std::uint64_t s = 3002;
  int done = 0;
  while (done < 10) {
    double qd = 0.05 + uniform(s) * 0.45;
    QBase base = QBase::make(ctx.complex(qd));
    Complex a = ctx.complex(0.1 + uniform(s) * 0.8);
    Complex b = ctx.complex(0.1 + uniform(s) * 0.8);
    Complex c = ctx.complex(0.1 + uniform(s) * 0.8);
    Complex d = ctx.complex(0.1 + uniform(s) * 0.8);
    Complex aq = a * base.q;
    Complex z = aq / (b * c * d);
    if (!(z.abs_up() < ctx.one())) continue;
    try {
      SeriesSpec bil;
      bil.base = base;
      bil.z = z;
      bil.lower = LowerBound::bilateral;
      bil.numer = {ParamExpr::vwp(a), ParamExpr::plain(b), ParamExpr::plain(c), ParamExpr::plain(d),
                   ParamExpr::plain(a)};
      bil.denom = {ParamExpr::vwp(a), ParamExpr::plain(aq / b), ParamExpr::plain(aq / c),
                   ParamExpr::plain(aq / d), ParamExpr::plain(base.q)};
      EvalResult lhs = eval_series(bil, ctx);
      const Complex nums[] = {aq, aq / (b * c), aq / (b * d), aq / (c * d)};
      const Complex dens[] = {aq / b, aq / c, aq / d, z};
      BoundedValue closed =
          bv_div(poch_multi_inf(nums, base, ctx), poch_multi_inf(dens, base, ctx));
      ck.require(residual_between(lhs.value, closed, ctx) <= 1e-35,
                 "e=a degeneration residual above 1e-35");
      ++done;
    } catch (const PoleError&) {
    } catch (const DivisionNearZero&) {
    } catch (const NoConvergence&) {
    }
  }
}

// --------------------------------------------------------------------------
// 4. Three-term sum and its semi-finite form at n in {0,1,2,5,10}:
//    25 samples per configuration, residual <= 1e-30, skips <= 20%.
// --------------------------------------------------------------------------
void criterion4(Checker& ck) {
  SweepResult r4 = run_sweep(base_config(IdentityId::EIGHTPHI7_EXT, 25, 4001, 1e-30));
  summarize_sweep(ck, r4, 1e-30, "EIGHTPHI7_EXT", 0.2);
  SweepConfig cfg = base_config(IdentityId::SEMI_6PSI6, 125, 4002, 1e-30);
  cfg.n_values = {0, 1, 2, 5, 10};
  SweepResult r5 = run_sweep(cfg);
  summarize_sweep(ck, r5, 1e-30, "SEMI_6PSI6", 0.2);
}

// --------------------------------------------------------------------------
// 5. Two-term transformations: base form, semi-finite at n in {0,1,3,8},
//    and the 6psi6 transformation; 25 samples each, residual <= 1e-30.
// --------------------------------------------------------------------------
void criterion5(Checker& ck) {
  SweepResult r9 = run_sweep(base_config(IdentityId::EIGHTPHI7_TRANS, 25, 5001, 1e-30));
  summarize_sweep(ck, r9, 1e-30, "EIGHTPHI7_TRANS");
  SweepConfig cfg = base_config(IdentityId::SEMI_8PHI7, 100, 5002, 1e-30);
  cfg.n_values = {0, 1, 3, 8};
  SweepResult r10 = run_sweep(cfg);
  summarize_sweep(ck, r10, 1e-30, "SEMI_8PHI7");
  SweepResult r11 = run_sweep(base_config(IdentityId::SIXPSI6_TRANS, 25, 5003, 1e-30));
  summarize_sweep(ck, r11, 1e-30, "SIXPSI6_TRANS");
}

// --------------------------------------------------------------------------
// 6. Four-term transformation, its semi-finite form at n in {0,1,3}, and the
//    8psi8 transformation; 15 samples each, residual <= 1e-28.
// --------------------------------------------------------------------------
void criterion6(Checker& ck) {
  SweepResult r12 = run_sweep(base_config(IdentityId::TENPHI9_4TERM, 15, 6001, 1e-28));
  summarize_sweep(ck, r12, 1e-28, "TENPHI9_4TERM");
  SweepConfig cfg = base_config(IdentityId::SEMI_10PHI9, 45, 6002, 1e-28);
  cfg.n_values = {0, 1, 3};
  SweepResult r13 = run_sweep(cfg);
  summarize_sweep(ck, r13, 1e-28, "SEMI_10PHI9");
  SweepResult r14 = run_sweep(base_config(IdentityId::EIGHTPSI8_TRANS, 15, 6003, 1e-28));
  summarize_sweep(ck, r14, 1e-28, "EIGHTPSI8_TRANS");
}

// --------------------------------------------------------------------------
// 7. Limit studies: gap to the bilateral value below 1e-20 by n = 40 for the
//    semi-finite 6psi6 (vanishing term decreasing from n >= 5), and below
//    1e-15 by n = 60 for the other two.
// --------------------------------------------------------------------------
void criterion7(Checker& ck) {
  EvalContext ctx = EvalContext::with_digits(50);
  {
    ParamSet ps = default_limit_params(IdentityId::SEMI_6PSI6, ctx);
    // precondition of the study: |b| = |q a^2/(cdef)| <= 0.4
    ParamSet solved = ps;
    solved.n = 0;
    solved = solve_constraints(IdentityId::SEMI_6PSI6, solved, ctx);
    ck.require(solved.b.abs_n().to_double() <= 0.4, "study parameters must satisfy |b| <= 0.4");
    const long ns[] = {1, 2, 5, 10, 15, 20, 25, 30, 35, 40};
    LimitStudyResult st = run_limit_study(IdentityId::SEMI_6PSI6, ps, ns, ctx);
    ck.require(st.rows.back().gap.to_double() < 1e-20, "SEMI_6PSI6 gap(40) not below 1e-20");
    for (std::size_t i = 3; i + 1 < st.rows.size(); ++i) {  // rows from n=10 vs n=5 onward
      ck.require(st.rows[i + 1].vanishing_term.value.abs_n() <
                     st.rows[i].vanishing_term.value.abs_n(),
                 "SEMI_6PSI6 vanishing term not decreasing past n=5");
      ck.require(st.rows[i + 1].gap < st.rows[i].gap, "SEMI_6PSI6 gap not decreasing past n=5");
    }
    // the vanishing term must shrink at every recorded step from n = 5 on
    ck.require(st.rows[3].vanishing_term.value.abs_n() < st.rows[2].vanishing_term.value.abs_n(),
               "SEMI_6PSI6 vanishing term not decreasing at n=5 -> 10");
  }
  for (IdentityId id : {IdentityId::SEMI_8PHI7, IdentityId::SEMI_10PHI9}) {
    ParamSet ps = default_limit_params(id, ctx);
    const long ns[] = {5, 10, 20, 30, 40, 50, 60};
    LimitStudyResult st = run_limit_study(id, ps, ns, ctx);
    ck.require(st.rows.back().gap.to_double() < 1e-15,
               std::string(to_string(id)) + " gap(60) not below 1e-15");
    for (std::size_t i = 0; i + 1 < st.rows.size(); ++i) {
      ck.require(st.rows[i + 1].gap < st.rows[i].gap,
                 std::string(to_string(id)) + " gap not eventually decreasing");
    }
  }
}

// --------------------------------------------------------------------------
// 8. Shift invariance: 100 randomized convergent specs, dual-evaluation
//    residual <= 1e-40.
// --------------------------------------------------------------------------
void criterion8(Checker& ck) {
  EvalContext ctx = EvalContext::with_digits(50).with_eps_exp(50);
  std::uint64_t s = 8001;
  int done = 0;
  while (done < 100) {
    QBase base = QBase::make(ctx.complex(0.05 + uniform(s) * 0.45));
    SeriesSpec spec;
    long n = static_cast<long>(splitmix(s) % 51);
    if (splitmix(s) % 2 == 0) {
      // plain ratio shape: s_num plains over s_num - 1 plains
      spec.base = base;
      spec.z = ctx.complex(0.05 + uniform(s) * 0.65);
      spec.lower = LowerBound::zero;
      long cnt = 1 + static_cast<long>(splitmix(s) % 3);
      for (long i = 0; i < cnt; ++i)
        spec.numer.push_back(ParamExpr::plain(ctx.complex(0.1 + uniform(s) * 0.8)));
      for (long i = 0; i + 1 < cnt; ++i)
        spec.denom.push_back(ParamExpr::plain(ctx.complex(0.1 + uniform(s) * 0.8)));
    } else {
      // very-well-poised shape
      Complex a = ctx.complex(0.1 + uniform(s) * 0.8);
      std::vector<Complex> rest;
      long cnt = 1 + static_cast<long>(splitmix(s) % 3);
      for (long i = 0; i < cnt; ++i) rest.push_back(ctx.complex(0.1 + uniform(s) * 0.8));
      spec = wp_phi(a, rest, ctx.complex(0.05 + uniform(s) * 0.65), base);
    }
    try {
      Real resid = verify_shift_invariance(spec, n, ctx);
      ck.require(resid.to_double() <= 1e-40, "shift invariance residual above 1e-40 (n=" +
                                                 std::to_string(n) + ")");
      ++done;
    } catch (const PoleError&) {
    } catch (const DivisionNearZero&) {
    }
  }
}

// --------------------------------------------------------------------------
// 9. Oracle equivalence: recurrence evaluator vs brute-force direct summation
//    over k in [-300, 300] at 80 digits, 10 small instances per bilateral
//    identity, agreement within certified bounds.
// --------------------------------------------------------------------------
void criterion9(Checker& ck) {
  EvalContext ctx = EvalContext::with_digits(50);
  EvalContext hi = EvalContext::with_digits(80);
  std::uint64_t s = 9001;

  auto check_series = [&](const SeriesSpec& spec50, const SeriesSpec& spec80, const char* label) {
    EvalResult v = eval_series(spec50, ctx);
    Complex brute = oracle::bilateral_brute(spec80, 300, hi.bits());
    Real dist = (v.value.value - brute).abs_n();
    ck.require(dist <= v.value.abs_err + hi.real("1e-70"),
               std::string(label) + ": recurrence vs brute-force outside certified bounds");
  };

  // 1psi1: rates |z| and |b/(a z)| both kept <= 0.5 so the +-300 cut is tiny.
  int done = 0;
  while (done < 10) {
    double q = 0.05 + uniform(s) * 0.45;
    double a = 0.5 + uniform(s) * 0.4, b = 0.1 + uniform(s) * 0.1, z = 0.4 + uniform(s) * 0.1;
    if (b / a > 0.5 * z) continue;
    auto mk = [&](const EvalContext& c) {
      SeriesSpec sp;
      sp.base = QBase::make(c.complex(q));
      sp.z = c.complex(z);
      sp.lower = LowerBound::bilateral;
      sp.numer = {ParamExpr::plain(c.complex(a))};
      sp.denom = {ParamExpr::plain(c.complex(b))};
      return sp;
    };
    try {
      check_series(mk(ctx), mk(hi), "ONEPSI1 series");
      ++done;
    } catch (const PoleError&) {
    } catch (const NoConvergence&) {
    }
  }

  // very-well-poised 6psi6 / 8psi8 shapes with |z| <= 0.5 via the identities'
  // own constraint solvers at both precisions.
  auto sample_and_check = [&](IdentityId id, const char* label) {
    int ok = 0;
    while (ok < 10) {
      double q = 0.05 + uniform(s) * 0.45;
      double letters[8];
      for (double& L : letters) L = 0.1 + uniform(s) * 0.8;
      auto fill = [&](const EvalContext& c) {
        ParamSet ps;
        for (char ch : std::string_view("abcdefgh")) ps.letter(ch) = Complex::zero(c.bits());
        ps.lambda = Complex::zero(c.bits());
        ps.base = QBase::make(c.complex(q));
        int i = 0;
        for (char ch : identity_info(id).free_letters) ps.letter(ch) = c.complex(letters[i++]);
        return ps;
      };
      try {
        ParamSet lo = solve_constraints(id, fill(ctx), ctx);
        ParamSet hi_ps = solve_constraints(id, fill(hi), hi);
        SeriesSpec s50, s80;
        if (id == IdentityId::SIXPSI6_SUM) {
          Complex z50 = lo.base.q * lo.a * lo.a / (lo.b * lo.c * lo.d * lo.e);
          if (z50.abs_n().to_double() > 0.5) continue;
          const Complex p50[] = {lo.b, lo.c, lo.d, lo.e};
          const Complex p80[] = {hi_ps.b, hi_ps.c, hi_ps.d, hi_ps.e};
          s50 = wp_psi(lo.a, p50, z50, lo.base);
          s80 = wp_psi(hi_ps.a, p80,
                       hi_ps.base.q * hi_ps.a * hi_ps.a / (hi_ps.b * hi_ps.c * hi_ps.d * hi_ps.e),
                       hi_ps.base);
        } else if (id == IdentityId::SIXPSI6_TRANS) {
          Complex z50 = lo.base.q * lo.a * lo.a / (lo.c * lo.d * lo.e * lo.f);
          if (z50.abs_n().to_double() > 0.5) continue;
          const Complex p50[] = {lo.c, lo.d, lo.e, lo.f};
          const Complex p80[] = {hi_ps.c, hi_ps.d, hi_ps.e, hi_ps.f};
          s50 = wp_psi(lo.a, p50, z50, lo.base);
          s80 = wp_psi(hi_ps.a, p80,
                       hi_ps.base.q * hi_ps.a * hi_ps.a / (hi_ps.c * hi_ps.d * hi_ps.e * hi_ps.f),
                       hi_ps.base);
        } else {  // EIGHTPSI8_TRANS
          if (lo.c.abs_n().to_double() > 0.5) continue;
          const Complex p50[] = {lo.b, lo.d, lo.e, lo.f, lo.g, lo.h};
          const Complex p80[] = {hi_ps.b, hi_ps.d, hi_ps.e, hi_ps.f, hi_ps.g, hi_ps.h};
          s50 = wp_psi(lo.a, p50, lo.c, lo.base);
          s80 = wp_psi(hi_ps.a, p80, hi_ps.c, hi_ps.base);
        }
        check_series(s50, s80, label);
        ++ok;
      } catch (const ConstraintViolation&) {
      } catch (const PoleError&) {
      } catch (const NoConvergence&) {
      }
    }
  };
  sample_and_check(IdentityId::SIXPSI6_SUM, "SIXPSI6_SUM lhs");
  sample_and_check(IdentityId::SIXPSI6_TRANS, "SIXPSI6_TRANS lhs");
  sample_and_check(IdentityId::EIGHTPSI8_TRANS, "EIGHTPSI8_TRANS lhs");
}

// --------------------------------------------------------------------------
// 10. Determinism: fixed seed, byte-identical JSON across runs and worker
//     counts.
// --------------------------------------------------------------------------
void criterion10(Checker& ck) {
  SweepConfig cfg = base_config(IdentityId::SIXPSI6_SUM, 20, 777, 1e-30);
  cfg.jobs = 3;
  std::string first = emit_report(run_sweep(cfg), ReportFormat::json);
  std::string second = emit_report(run_sweep(cfg), ReportFormat::json);
  ck.require(first == second, "repeated sweep not byte-identical");
  cfg.jobs = 1;
  std::string serial = emit_report(run_sweep(cfg), ReportFormat::json);
  ck.require(first == serial, "worker count changed the report bytes");

  SweepConfig cfg2 = base_config(IdentityId::SEMI_8PHI7, 8, 778, 1e-30);
  cfg2.n_values = {0, 2};
  std::string a = emit_report(run_sweep(cfg2), ReportFormat::json);
  std::string b = emit_report(run_sweep(cfg2), ReportFormat::json);
  ck.require(a == b, "semi-finite sweep not byte-identical");
}

struct Criterion {
  int number;
  const char* title;
  double budget_seconds;  // 0 = no stated budget
  std::function<void(Checker&)> body;
};

}  // namespace

int main(int argc, char** argv) {
  std::vector<Criterion> criteria = {
      {1, "Pochhammer algebra: splitting, inversion, elementary identities (<= 1e-40)", 10.0,
       criterion1},
      {2, "closed-form sums 6phi5 and 1psi1 (<= 1e-35)", 30.0, criterion2},
      {3, "Bailey 6psi6 summation + e=a degeneration (<= 1e-35)", 60.0, criterion3},
      {4, "three-term sum and semi-finite form, n in {0,1,2,5,10} (<= 1e-30)", 300.0, criterion4},
      {5, "two-term transformations, n in {0,1,3,8} (<= 1e-30)", 0.0, criterion5},
      {6, "four-term family and 8psi8 transformation (<= 1e-28)", 600.0, criterion6},
      {7, "limit studies: gaps below 1e-20 (n=40) / 1e-15 (n=60)", 0.0, criterion7},
      {8, "shift invariance on 100 random specs (<= 1e-40)", 0.0, criterion8},
      {9, "recurrence evaluator vs brute-force direct summation", 0.0, criterion9},
      {10, "byte-identical reports for a fixed seed", 0.0, criterion10},
  };

  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));

  int failed = 0;
  for (auto& crit : criteria) {
    if (!selected.empty() && !selected.count(crit.number)) continue;
    Checker ck;
    auto start = std::chrono::steady_clock::now();
    try {
      crit.body(ck);
    } catch (const std::exception& e) {
      ck.failures.push_back(std::string("exception: ") + e.what());
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (crit.budget_seconds > 0 && secs > crit.budget_seconds) {
      ck.failures.push_back("runtime " + std::to_string(secs) + "s exceeds budget " +
                            std::to_string(crit.budget_seconds) + "s");
    }
    if (ck.failures.empty()) {
      std::printf("[PASS] criterion %2d: %s (%ld checks, %.1fs)\n", crit.number, crit.title,
                  ck.checks, secs);
    } else {
      ++failed;
      std::printf("[FAIL] criterion %2d: %s (%.1fs)\n", crit.number, crit.title, secs);
      for (const auto& f : ck.failures) std::printf("       - %s\n", f.c_str());
    }
    std::fflush(stdout);
  }
  return failed == 0 ? 0 : 1;
}
