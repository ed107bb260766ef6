#include "qpsi/harness.hpp"

#include <atomic>
#include <cstdio>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace qpsi {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr long kRejectionBudgetPerSample = 1000;

EvalContext context_for(const SweepConfig& cfg) {
  EvalContext::Options opt;
  opt.precision_digits = cfg.precision_digits;
  opt.max_terms = cfg.max_terms;
  opt.pole_distance_min = cfg.pole_distance_min;
  return EvalContext::make(opt);
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

SampleRng::SampleRng(std::uint64_t seed, long sample_index) {
  s_ = seed ^ (0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(sample_index + 1));
  for (int i = 0; i < 4; ++i) next();
}

std::uint64_t SampleRng::next() {
  s_ += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = s_;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double SampleRng::unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

double SampleRng::range(double lo, double hi) { return lo + (hi - lo) * unit(); }

ParamSet draw_params(IdentityId id, SampleRng& rng, const SweepConfig& cfg,
                     const EvalContext& ctx) {
  const IdentityInfo& info = identity_info(id);
  ParamSet ps;
  for (char ch : std::string_view("abcdefgh")) ps.letter(ch) = Complex::zero(ctx.bits());
  ps.lambda = Complex::zero(ctx.bits());
  ps.base = QBase::make(ctx.complex(rng.range(cfg.q_min, cfg.q_max)));
  for (char ch : info.free_letters) {
    double modulus = rng.range(0.1, 0.9);
    if (cfg.complex_params) {
      double theta = rng.range(0.0, 6.283185307179586);
      Real t = ctx.real(theta);
      Real c(ctx.bits()), s(ctx.bits());
      mpfr_sin_cos(s.raw(), c.raw(), t.raw(), MPFR_RNDN);
      Real m = ctx.real(modulus);
      ps.letter(ch) = Complex(m * c, m * s);
    } else {
      ps.letter(ch) = ctx.complex(modulus);
    }
  }
  return ps;
}

namespace {

SampleOutcome run_one_sample(const SweepConfig& cfg, long index, const EvalContext& ctx,
                             const Real& tolerance) {
  const IdentityInfo& info = identity_info(cfg.identity);
  SampleRng rng(cfg.seed, index);
  long n = 0;
  if (info.semi_finite && !cfg.n_values.empty()) {
    n = cfg.n_values[static_cast<std::size_t>(index) % cfg.n_values.size()];
  }
  SampleOutcome out;
  out.index = index;
  ParamSet solved;
  while (true) {
    ParamSet ps = draw_params(cfg.identity, rng, cfg, ctx);
    ps.n = n;
    try {
      solved = solve_constraints(cfg.identity, ps, ctx);
      break;
    } catch (const ConstraintViolation&) {
      if (++out.rejections >= kRejectionBudgetPerSample) {
        throw ConfigError("run_sweep: sample " + std::to_string(index) +
                          " found no admissible parameters after " +
                          std::to_string(kRejectionBudgetPerSample) + " rejections");
      }
    }
  }
  out.report = check_identity(cfg.identity, solved, ctx, tolerance);
  return out;
}

}  // namespace

SweepResult run_sweep(const SweepConfig& config) {
  SweepConfig cfg = config;
  if (cfg.samples < 0) throw ConfigError("run_sweep: samples must be >= 0");
  const IdentityInfo& info = identity_info(cfg.identity);
  if (info.semi_finite && cfg.n_values.empty()) cfg.n_values = {0, 1, 2, 5};
  EvalContext ctx = context_for(cfg);
  Real tolerance = ctx.real(cfg.tolerance);

  SweepResult result;
  result.config = cfg;
  result.samples.resize(static_cast<std::size_t>(cfg.samples));

  int jobs = cfg.jobs;
  if (jobs < 1) jobs = 1;
  jobs = static_cast<int>(std::min<long>(jobs, std::max<long>(cfg.samples, 1)));

  if (jobs == 1) {
    for (long i = 0; i < cfg.samples; ++i) {
      result.samples[static_cast<std::size_t>(i)] = run_one_sample(cfg, i, ctx, tolerance);
    }
  } else {
    std::atomic<long> next_index{0};
    std::mutex err_mu;
    std::exception_ptr first_error;
    auto worker = [&]() {
      while (true) {
        long i = next_index.fetch_add(1);
        if (i >= cfg.samples) return;
        try {
          result.samples[static_cast<std::size_t>(i)] = run_one_sample(cfg, i, ctx, tolerance);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> threads;
    threads.reserve(static_cast<std::size_t>(jobs));
    for (int t = 0; t < jobs; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (first_error) std::rethrow_exception(first_error);
  }

  SweepSummary& s = result.summary;
  s.samples = cfg.samples;
  s.max_residual = ctx.zero();
  for (const auto& sample : result.samples) {
    s.rejections += sample.rejections;
    if (sample.report.skipped) {
      ++s.skips;
      continue;
    }
    if (sample.report.pass) {
      ++s.passes;
    } else {
      ++s.failures;
    }
    if (sample.report.residual > s.max_residual) s.max_residual = sample.report.residual;
  }
  return result;
}

// ---------------------------------------------------------------------------
// Limit studies
// ---------------------------------------------------------------------------

LimitStudyResult run_limit_study(IdentityId id, const ParamSet& params,
                                 std::span<const long> n_values, const EvalContext& ctx) {
  if (id != IdentityId::SEMI_6PSI6 && id != IdentityId::SEMI_8PHI7 &&
      id != IdentityId::SEMI_10PHI9) {
    throw ConfigError("run_limit_study: identity has no semi-finite depth parameter");
  }

  // Solve once (n = 0) to fill derived letters, then validate the limit-regime
  // moduli that the finite-n identity itself does not need.
  ParamSet base_ps = params;
  base_ps.n = 0;
  base_ps = solve_constraints(id, base_ps, ctx);
  const Complex& q = base_ps.base.q;
  const Complex &a = base_ps.a, &b = base_ps.b, &c = base_ps.c, &d = base_ps.d, &e = base_ps.e,
                &f = base_ps.f, &g = base_ps.g, &h = base_ps.h;

  LimitStudyResult out;
  out.identity = id;
  out.params = base_ps;

  BoundedValue target;
  switch (id) {
    case IdentityId::SEMI_6PSI6: {
      // |b| = |q a^2/(cdef)| < 1 is the limit modulus; the target is the
      // bilateral summation's closed form in the letters c, d, e, f.
      Complex zb = q * a * a / (c * d * e * f);
      if (!(zb.abs_up() < ctx.one())) {
        throw ConstraintViolation("limit study: need |q a^2/(cdef)| < 1");
      }
      Complex aq = a * q;
      ProductExpr pe;
      pe.scalar = BoundedValue::exact(Complex::one(ctx.bits()));
      pe.numer = {{q, true, 0},
                  {aq, true, 0},
                  {q / a, true, 0},
                  {aq / (c * d), true, 0},
                  {aq / (c * e), true, 0},
                  {aq / (c * f), true, 0},
                  {aq / (d * e), true, 0},
                  {aq / (d * f), true, 0},
                  {aq / (e * f), true, 0}};
      pe.denom = {{q / c, true, 0},
                  {q / d, true, 0},
                  {q / e, true, 0},
                  {q / f, true, 0},
                  {aq / c, true, 0},
                  {aq / d, true, 0},
                  {aq / e, true, 0},
                  {aq / f, true, 0},
                  {zb, true, 0}};
      target = eval_product(pe, base_ps.base, ctx);
      break;
    }
    case IdentityId::SEMI_8PHI7: {
      Complex zb = q * a * a / (c * d * e * f);
      if (!(zb.abs_up() < ctx.one())) {
        throw ConstraintViolation("limit study: need |q a^2/(cdef)| < 1");
      }
      const Complex ps6[] = {c, d, e, f};
      target = eval_series(wp_psi(a, ps6, zb, base_ps.base), ctx).value;
      break;
    }
    case IdentityId::SEMI_10PHI9: {
      if (!(c.abs_up() < ctx.one())) throw ConstraintViolation("limit study: need |c| < 1");
      if (!((a * q / (d * e)).abs_up() < ctx.one())) {
        throw ConstraintViolation("limit study: need |a q/(de)| < 1");
      }
      const Complex ps8[] = {b, d, e, f, g, h};
      target = eval_series(wp_psi(a, ps8, c, base_ps.base), ctx).value;
      break;
    }
    default: break;
  }

  for (long n : n_values) {
    ParamSet ps_n = params;
    ps_n.n = n;
    ps_n = solve_constraints(id, ps_n, ctx);
    IdentityInstance inst = build_instance(id, ps_n, ctx);

    // The first LHS term is always the semi-finite sum whose limit is the
    // bilateral target.
    const TermExpr& semi = inst.lhs.front();
    BoundedValue lhs_val = eval_product(semi.coeff, ps_n.base, ctx);
    lhs_val = bv_mul(lhs_val, eval_series(*semi.series, ctx).value);

    LimitRow row;
    row.n = n;
    row.semi_finite_lhs = lhs_val;
    row.bilateral_target = target;
    if (id == IdentityId::SEMI_6PSI6) {
      // The coefficient carries b^{n+1}; this is the term that tends to 0.
      const TermExpr& van = inst.rhs.front();
      BoundedValue v = eval_product(van.coeff, ps_n.base, ctx);
      row.vanishing_term = bv_mul(v, eval_series(*van.series, ctx).value);
    } else {
      row.vanishing_term = BoundedValue::exact(Complex::zero(ctx.bits()));
    }
    row.gap = (lhs_val.value - target.value).abs_n();
    out.rows.push_back(std::move(row));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

std::optional<ReportFormat> format_from_string(std::string_view s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  if (s == "text") return ReportFormat::text;
  return std::nullopt;
}

namespace {

ordered_json complex_json(const Complex& z) {
  return ordered_json{{"re", z.re.to_string_exact()}, {"im", z.im.to_string_exact()}};
}

ordered_json params_json(const ParamSet& ps, IdentityId id) {
  const IdentityInfo& info = identity_info(id);
  ordered_json j;
  j["q"] = complex_json(ps.base.q);
  if (info.semi_finite) j["n"] = ps.n;
  for (char ch : std::string_view("abcdefgh")) {
    if (!ps.letter(ch).is_zero()) j[std::string(1, ch)] = complex_json(ps.letter(ch));
  }
  if (!ps.lambda.is_zero()) j["lambda"] = complex_json(ps.lambda);
  return j;
}

ordered_json sample_json(const SampleOutcome& s, IdentityId id) {
  ordered_json j;
  j["index"] = s.index;
  j["rejections"] = s.rejections;
  j["params"] = params_json(s.report.params, id);
  j["residual"] = s.report.residual.to_string_exact();
  j["pass"] = s.report.pass;
  j["skipped"] = s.report.skipped;
  if (s.report.skipped) j["skip_reason"] = s.report.skip_reason;
  ordered_json diag;
  diag["lhs_value"] = complex_json(s.report.lhs.value);
  diag["rhs_value"] = complex_json(s.report.rhs.value);
  diag["lhs_abs_err"] = s.report.lhs.abs_err.to_string_exact();
  diag["rhs_abs_err"] = s.report.rhs.abs_err.to_string_exact();
  ordered_json comps = ordered_json::array();
  for (const auto& c : s.report.diagnostics) {
    comps.push_back(ordered_json{{"label", c.label},
                                 {"terms_up", c.terms_up},
                                 {"terms_down", c.terms_down},
                                 {"tail_bound", c.tail_bound.to_string_exact()},
                                 {"abs_err", c.abs_err.to_string_exact()},
                                 {"converged", c.converged}});
  }
  diag["components"] = std::move(comps);
  j["diagnostics"] = std::move(diag);
  return j;
}

std::string csv_escape(const std::string& s) {
  std::string out;
  bool needs_quotes = s.find_first_of(",\"\n") != std::string::npos;
  if (!needs_quotes) return s;
  out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

std::string emit_report(const SweepResult& result, ReportFormat format) {
  const IdentityId id = result.config.identity;
  if (format == ReportFormat::json) {
    ordered_json j;
    j["identity"] = std::string(to_string(id));
    j["seed"] = result.config.seed;
    j["precision"] = result.config.precision_digits;
    j["tolerance"] = fmt_double(result.config.tolerance);
    j["q_range"] = ordered_json::array({fmt_double(result.config.q_min), fmt_double(result.config.q_max)});
    j["complex_params"] = result.config.complex_params;
    if (identity_info(id).semi_finite) j["n_values"] = result.config.n_values;
    ordered_json samples = ordered_json::array();
    for (const auto& s : result.samples) samples.push_back(sample_json(s, id));
    j["samples"] = std::move(samples);
    j["summary"] = ordered_json{{"samples", result.summary.samples},
                                {"passes", result.summary.passes},
                                {"failures", result.summary.failures},
                                {"skips", result.summary.skips},
                                {"rejections", result.summary.rejections},
                                {"max_residual", result.summary.max_residual.to_string_exact()}};
    return j.dump(2) + "\n";
  }

  if (format == ReportFormat::csv) {
    std::ostringstream os;
    os << "index,identity,n,q,residual,pass,skipped,rejections\n";
    for (const auto& s : result.samples) {
      os << s.index << ',' << to_string(id) << ',' << s.report.params.n << ','
         << s.report.params.base.q.re.to_string_exact() << ','
         << s.report.residual.to_string_exact() << ',' << (s.report.pass ? 1 : 0) << ','
         << (s.report.skipped ? 1 : 0) << ',' << s.rejections << '\n';
    }
    os << "# summary: samples=" << result.summary.samples << " passes=" << result.summary.passes
       << " failures=" << result.summary.failures << " skips=" << result.summary.skips
       << " max_residual=" << result.summary.max_residual.to_string_exact() << '\n';
    return os.str();
  }

  std::ostringstream os;
  os << "identity " << to_string(id) << "  seed " << result.config.seed << "  digits "
     << result.config.precision_digits << "\n";
  os << "  idx    n  residual                       status\n";
  for (const auto& s : result.samples) {
    std::string status = s.report.skipped ? "SKIP" : (s.report.pass ? "pass" : "FAIL");
    os << "  " << s.index;
    for (std::size_t pad = std::to_string(s.index).size(); pad < 5; ++pad) os << ' ';
    os << s.report.params.n << "  ";
    std::string r = s.report.residual.to_string(8);
    os << r;
    for (std::size_t pad = r.size(); pad < 31; ++pad) os << ' ';
    os << status << "\n";
  }
  os << "summary: " << result.summary.passes << " pass, " << result.summary.failures << " fail, "
     << result.summary.skips << " skip of " << result.summary.samples
     << "; max residual " << result.summary.max_residual.to_string(8) << "; rejections "
     << result.summary.rejections << "\n";
  return os.str();
}

std::string emit_limit_study(const LimitStudyResult& result, ReportFormat format) {
  if (format == ReportFormat::json) {
    ordered_json j;
    j["identity"] = std::string(to_string(result.identity));
    j["params"] = params_json(result.params, result.identity);
    ordered_json rows = ordered_json::array();
    for (const auto& r : result.rows) {
      rows.push_back(ordered_json{{"n", r.n},
                                  {"semi_finite_lhs", complex_json(r.semi_finite_lhs.value)},
                                  {"lhs_abs_err", r.semi_finite_lhs.abs_err.to_string_exact()},
                                  {"bilateral_target", complex_json(r.bilateral_target.value)},
                                  {"target_abs_err", r.bilateral_target.abs_err.to_string_exact()},
                                  {"vanishing_term", complex_json(r.vanishing_term.value)},
                                  {"gap", r.gap.to_string_exact()}});
    }
    j["rows"] = std::move(rows);
    return j.dump(2) + "\n";
  }
  if (format == ReportFormat::csv) {
    std::ostringstream os;
    os << "n,gap,vanishing_term_abs,lhs_re,lhs_im,target_re,target_im\n";
    for (const auto& r : result.rows) {
      os << r.n << ',' << r.gap.to_string_exact() << ','
         << r.vanishing_term.value.abs_n().to_string_exact() << ','
         << r.semi_finite_lhs.value.re.to_string_exact() << ','
         << r.semi_finite_lhs.value.im.to_string_exact() << ','
         << r.bilateral_target.value.re.to_string_exact() << ','
         << r.bilateral_target.value.im.to_string_exact() << '\n';
    }
    return os.str();
  }
  std::ostringstream os;
  os << "limit study " << to_string(result.identity) << "\n";
  os << "    n  gap              |vanishing term|\n";
  for (const auto& r : result.rows) {
    std::string ns = std::to_string(r.n);
    for (std::size_t pad = ns.size(); pad < 5; ++pad) os << ' ';
    os << ns << "  ";
    std::string gs = r.gap.to_string(6);
    os << gs;
    for (std::size_t pad = gs.size(); pad < 17; ++pad) os << ' ';
    os << r.vanishing_term.value.abs_n().to_string(6) << "\n";
  }
  return os.str();
}

ParsedReport parse_report_json(std::string_view json_text) {
  ordered_json j = ordered_json::parse(json_text);
  ParsedReport out;
  out.identity = j.at("identity").get<std::string>();
  out.seed = j.at("seed").get<std::uint64_t>();
  out.precision = j.at("precision").get<int>();
  for (const auto& s : j.at("samples")) {
    ParsedSample ps;
    ps.index = s.at("index").get<long>();
    ps.residual = s.at("residual").get<std::string>();
    ps.pass = s.at("pass").get<bool>();
    ps.skipped = s.at("skipped").get<bool>();
    out.samples.push_back(std::move(ps));
  }
  out.max_residual = j.at("summary").at("max_residual").get<std::string>();
  return out;
}

namespace {

Complex complex_from_json(const ordered_json& v, const EvalContext& ctx) {
  if (v.is_string()) return ctx.complex(v.get<std::string>());
  if (v.is_number()) return ctx.complex(v.get<double>());
  if (v.is_object()) {
    std::string re = v.contains("re") ? v.at("re").get<std::string>() : "0";
    std::string im = v.contains("im") ? v.at("im").get<std::string>() : "0";
    return ctx.complex(re, im);
  }
  throw ConfigError("params: complex values must be strings or {re, im} objects");
}

}  // namespace

ParamSet parse_params_json(std::string_view text, IdentityId id, const EvalContext& ctx) {
  ordered_json j = ordered_json::parse(text);
  ParamSet ps = default_limit_params(id, ctx);
  if (j.contains("q")) ps.base = QBase::make(complex_from_json(j.at("q"), ctx));
  for (char ch : std::string_view("abcdefgh")) {
    std::string key(1, ch);
    if (j.contains(key)) ps.letter(ch) = complex_from_json(j.at(key), ctx);
  }
  if (j.contains("n")) ps.n = j.at("n").get<long>();
  return ps;
}

ParamSet default_limit_params(IdentityId id, const EvalContext& ctx) {
  ParamSet ps;
  for (char ch : std::string_view("abcdefgh")) ps.letter(ch) = Complex::zero(ctx.bits());
  ps.lambda = Complex::zero(ctx.bits());
  switch (id) {
    case IdentityId::SEMI_6PSI6:
      ps.base = QBase::make(ctx.complex("0.3"));
      ps.a = ctx.complex("0.6");
      ps.c = ctx.complex("0.75");
      ps.d = ctx.complex("0.78");
      ps.e = ctx.complex("0.8");
      ps.f = ctx.complex("0.77");
      break;
    case IdentityId::SEMI_8PHI7:
      ps.base = QBase::make(ctx.complex("0.25"));
      ps.a = ctx.complex("0.5");
      ps.b = ctx.complex("0.6");
      ps.c = ctx.complex("0.55");
      ps.d = ctx.complex("0.6");
      ps.e = ctx.complex("0.65");
      ps.f = ctx.complex("0.7");
      break;
    case IdentityId::SEMI_10PHI9:
      ps.base = QBase::make(ctx.complex("0.25"));
      ps.a = ctx.complex("0.55");
      ps.b = ctx.complex("0.4");
      ps.d = ctx.complex("0.6");
      ps.e = ctx.complex("0.62");
      ps.f = ctx.complex("0.58");
      ps.g = ctx.complex("0.56");
      ps.h = ctx.complex("0.54");
      break;
    default:
      throw ConfigError("default_limit_params: identity has no limit study");
  }
  return ps;
}

SeriesSpec parse_series_spec_json(std::string_view text, const EvalContext& ctx) {
  ordered_json j = ordered_json::parse(text);
  SeriesSpec spec;
  spec.base = QBase::make(complex_from_json(j.at("q"), ctx));
  spec.z = complex_from_json(j.at("z"), ctx);
  const auto& lower = j.at("lower");
  if (lower.is_string()) {
    std::string s = lower.get<std::string>();
    if (s == "zero") {
      spec.lower = LowerBound::zero;
    } else if (s == "bilateral") {
      spec.lower = LowerBound::bilateral;
    } else {
      throw ConfigError("series spec: lower must be 'zero', 'bilateral' or {\"minus_n\": n}");
    }
  } else if (lower.is_object() && lower.contains("minus_n")) {
    spec.lower = LowerBound::minus_n;
    spec.n = lower.at("minus_n").get<long>();
  } else {
    throw ConfigError("series spec: bad 'lower' field");
  }
  auto read_params = [&](const char* key, std::vector<ParamExpr>& out) {
    for (const auto& v : j.at(key)) {
      if (v.is_object() && v.contains("plain")) {
        out.push_back(ParamExpr::plain(complex_from_json(v.at("plain"), ctx)));
      } else if (v.is_object() && v.contains("vwp")) {
        out.push_back(ParamExpr::vwp(complex_from_json(v.at("vwp"), ctx)));
      } else {
        out.push_back(ParamExpr::plain(complex_from_json(v, ctx)));
      }
    }
  };
  read_params("numer", spec.numer);
  read_params("denom", spec.denom);
  spec.validate();
  return spec;
}

}  // namespace qpsi
