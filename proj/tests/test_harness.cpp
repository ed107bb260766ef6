#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "qpsi/harness.hpp"

using namespace qpsi;

TEST_CASE("per-sample rng is deterministic and index-separated") {
  SampleRng a(42, 7), b(42, 7), c(42, 8);
  for (int i = 0; i < 16; ++i) {
    std::uint64_t va = a.next();
    CHECK(va == b.next());
  }
  bool any_diff = false;
  SampleRng a2(42, 7);
  for (int i = 0; i < 16; ++i) any_diff |= (a2.next() != c.next());
  CHECK(any_diff);
}

TEST_CASE("draw_params respects the modulus window and phase mode") {
  EvalContext ctx = EvalContext::with_digits(50);
  SweepConfig cfg;
  cfg.identity = IdentityId::SIXPSI6_SUM;
  for (long i = 0; i < 20; ++i) {
    SampleRng rng(9, i);
    ParamSet ps = draw_params(cfg.identity, rng, cfg, ctx);
    for (char ch : std::string_view("abcde")) {
      const Complex& v = ps.letter(ch);
      CHECK(v.im.is_zero());
      double m = v.abs_n().to_double();
      CHECK(m >= 0.1);
      CHECK(m <= 0.9);
    }
    double q = ps.base.q.re.to_double();
    CHECK(q >= cfg.q_min);
    CHECK(q <= cfg.q_max);
  }
  cfg.complex_params = true;
  bool saw_imag = false;
  for (long i = 0; i < 10; ++i) {
    SampleRng rng(9, i);
    ParamSet ps = draw_params(cfg.identity, rng, cfg, ctx);
    for (char ch : std::string_view("abcde")) {
      saw_imag |= !ps.letter(ch).im.is_zero();
      double m = ps.letter(ch).abs_n().to_double();
      CHECK(m >= 0.0999999);
      CHECK(m <= 0.9000001);
    }
  }
  CHECK(saw_imag);
}

TEST_CASE("empty sweep yields an all-zero summary and valid JSON") {
  SweepConfig cfg;
  cfg.identity = IdentityId::SIXPHI5_SUM;
  cfg.samples = 0;
  SweepResult r = run_sweep(cfg);
  CHECK(r.samples.empty());
  CHECK(r.summary.passes == 0);
  CHECK(r.summary.failures == 0);
  CHECK(r.summary.skips == 0);
  std::string json = emit_report(r, ReportFormat::json);
  ParsedReport parsed = parse_report_json(json);
  CHECK(parsed.samples.empty());
  CHECK(parsed.identity == "SIXPHI5_SUM");
}

TEST_CASE("sweep accounting: passes + failures + skips = samples") {
  SweepConfig cfg;
  cfg.identity = IdentityId::SEMI_6PSI6;
  cfg.samples = 12;
  cfg.seed = 7;
  cfg.n_values = {0, 1, 2};
  SweepResult r = run_sweep(cfg);
  CHECK(r.summary.samples == 12);
  CHECK(r.summary.passes + r.summary.failures + r.summary.skips == r.summary.samples);
  CHECK(r.summary.failures == 0);
  // n values cycle by sample index
  for (const auto& s : r.samples) {
    CHECK(s.report.params.n == cfg.n_values[static_cast<std::size_t>(s.index) % 3]);
  }
}

TEST_CASE("determinism: same config twice gives byte-identical reports") {
  SweepConfig cfg;
  cfg.identity = IdentityId::ONEPSI1_SUM;
  cfg.samples = 9;
  cfg.seed = 20240811;
  std::string a = emit_report(run_sweep(cfg), ReportFormat::json);
  std::string b = emit_report(run_sweep(cfg), ReportFormat::json);
  CHECK(a == b);
}

TEST_CASE("determinism across worker counts") {
  SweepConfig cfg;
  cfg.identity = IdentityId::SIXPHI5_SUM;
  cfg.samples = 8;
  cfg.seed = 99;
  cfg.jobs = 1;
  std::string serial = emit_report(run_sweep(cfg), ReportFormat::json);
  cfg.jobs = 4;
  std::string parallel = emit_report(run_sweep(cfg), ReportFormat::json);
  CHECK(serial == parallel);
}

TEST_CASE("JSON round trip preserves residuals exactly") {
  SweepConfig cfg;
  cfg.identity = IdentityId::SIXPSI6_SUM;
  cfg.samples = 6;
  cfg.seed = 5;
  SweepResult r = run_sweep(cfg);
  ParsedReport parsed = parse_report_json(emit_report(r, ReportFormat::json));
  REQUIRE(parsed.samples.size() == 6);
  EvalContext ctx = EvalContext::with_digits(cfg.precision_digits);
  for (std::size_t i = 0; i < 6; ++i) {
    Real back = ctx.real(parsed.samples[i].residual);
    CHECK(back == r.samples[i].report.residual);
    CHECK(parsed.samples[i].pass == r.samples[i].report.pass);
  }
  Real maxback = ctx.real(parsed.max_residual);
  CHECK(maxback == r.summary.max_residual);
}

TEST_CASE("summary.max_residual equals the row maximum; csv has one row per sample") {
  SweepConfig cfg;
  cfg.identity = IdentityId::SIXPHI5_SUM;
  cfg.samples = 10;
  cfg.seed = 31;
  SweepResult r = run_sweep(cfg);
  Real m = EvalContext::with_digits(50).zero();
  for (const auto& s : r.samples) {
    if (!s.report.skipped && s.report.residual > m) m = s.report.residual;
  }
  CHECK(m == r.summary.max_residual);

  std::string csv = emit_report(r, ReportFormat::csv);
  long rows = static_cast<long>(std::count(csv.begin(), csv.end(), '\n'));
  CHECK(rows == cfg.samples + 2);  // header + samples + summary comment
}

TEST_CASE("limit study n = 0 row equals the plain identity check lhs") {
  EvalContext ctx = EvalContext::with_digits(50);
  ParamSet ps = default_limit_params(IdentityId::SEMI_6PSI6, ctx);
  const long ns[] = {0, 4};
  LimitStudyResult study = run_limit_study(IdentityId::SEMI_6PSI6, ps, ns, ctx);
  REQUIRE(study.rows.size() == 2);
  ParamSet solved = ps;
  solved.n = 0;
  solved = solve_constraints(IdentityId::SEMI_6PSI6, solved, ctx);
  IdentityReport check = check_identity(IdentityId::SEMI_6PSI6, solved, ctx);
  const LimitRow& row0 = study.rows[0];
  CHECK((row0.semi_finite_lhs.value - check.lhs.value).abs_n() <=
        row0.semi_finite_lhs.abs_err + check.lhs.abs_err);
  // the depth-4 row is strictly closer to the bilateral target
  CHECK(study.rows[1].gap < study.rows[0].gap);
}

TEST_CASE("limit study rejects identities without a depth parameter") {
  EvalContext ctx = EvalContext::with_digits(50);
  ParamSet ps = default_limit_params(IdentityId::SEMI_6PSI6, ctx);
  const long ns[] = {1};
  CHECK_THROWS_AS(run_limit_study(IdentityId::SIXPSI6_SUM, ps, ns, ctx), ConfigError);
}

TEST_CASE("limit study emits all three formats") {
  EvalContext ctx = EvalContext::with_digits(50);
  ParamSet ps = default_limit_params(IdentityId::SEMI_6PSI6, ctx);
  const long ns[] = {1, 2};
  LimitStudyResult study = run_limit_study(IdentityId::SEMI_6PSI6, ps, ns, ctx);
  std::string j = emit_limit_study(study, ReportFormat::json);
  CHECK(j.find("\"rows\"") != std::string::npos);
  std::string c = emit_limit_study(study, ReportFormat::csv);
  CHECK(std::count(c.begin(), c.end(), '\n') == 3);
  std::string t = emit_limit_study(study, ReportFormat::text);
  CHECK(t.find("SEMI_6PSI6") != std::string::npos);
}

TEST_CASE("params JSON parsing overrides defaults letter by letter") {
  EvalContext ctx = EvalContext::with_digits(50);
  ParamSet ps = parse_params_json(R"({"q": "0.2", "a": {"re": "0.5", "im": "0.1"}, "n": 3})",
                                  IdentityId::SEMI_6PSI6, ctx);
  CHECK(ps.base.q.re == ctx.real("0.2"));
  CHECK(ps.a.im == ctx.real("0.1"));
  CHECK(ps.n == 3);
  // untouched letters keep the built-in defaults
  ParamSet def = default_limit_params(IdentityId::SEMI_6PSI6, ctx);
  CHECK(ps.c.re == def.c.re);
}

TEST_CASE("series spec JSON drives eval_series") {
  EvalContext ctx = EvalContext::with_digits(50);
  SeriesSpec spec = parse_series_spec_json(
      R"({"q": "0.4", "z": "0.5", "lower": "zero", "numer": [{"plain": "0.4"}], "denom": []})",
      ctx);
  // geometric series: numerator q cancels the implicit (q)_k
  EvalResult r = eval_series(spec, ctx);
  Complex closed = Complex::one(ctx.bits()) / (Complex::one(ctx.bits()) - spec.z);
  CHECK((r.value.value - closed).abs_n().to_double() < 1e-40);

  CHECK_THROWS_AS(parse_series_spec_json(R"({"q": "0.4", "z": "1", "lower": "sideways",
                                            "numer": [], "denom": []})",
                                         ctx),
                  ConfigError);
}

TEST_CASE("rejection budget surfaces as ConfigError on an empty admissible region") {
  // With q pinned at 0.5 the 1psi1 closed form always contains the factor
  // argument q/a >= 0.55, which the halving grid q^k drives through the
  // near-pole band |1 - x q^k| < 0.49 for some k; a pole_distance_min of 0.49
  // therefore rejects every draw.
  SweepConfig cfg;
  cfg.identity = IdentityId::ONEPSI1_SUM;
  cfg.samples = 1;
  cfg.q_min = 0.5;
  cfg.q_max = 0.5;
  cfg.pole_distance_min = 0.49;
  CHECK_THROWS_AS(run_sweep(cfg), ConfigError);
}
