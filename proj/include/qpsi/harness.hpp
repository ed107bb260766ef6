#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qpsi/identities.hpp"

namespace qpsi {

struct SweepConfig {
  IdentityId identity = IdentityId::SIXPSI6_SUM;
  long samples = 50;
  std::uint64_t seed = 1;
  int precision_digits = 50;
  double q_min = 0.05, q_max = 0.5;
  bool complex_params = false;
  std::vector<long> n_values;  // cycled sample-by-sample for semi-finite identities
  double tolerance = 1e-30;
  long max_terms = 10000;
  double pole_distance_min = 1e-3;
  int jobs = 1;
};

struct SampleOutcome {
  long index = 0;
  long rejections = 0;
  IdentityReport report;
};

struct SweepSummary {
  long samples = 0, passes = 0, failures = 0, skips = 0, rejections = 0;
  Real max_residual;
};

struct SweepResult {
  SweepConfig config;
  std::vector<SampleOutcome> samples;
  SweepSummary summary;
};

// Rejection-samples admissible parameter sets and checks the identity on each.
// Deterministic: a fixed (config, seed) yields byte-identical reports for any
// worker count. Throws ConfigError when a sample exhausts its rejection budget.
SweepResult run_sweep(const SweepConfig& config);

// ---------------------------------------------------------------------------
// Limit studies: the semi-finite sum against its bilateral limit.
// ---------------------------------------------------------------------------

struct LimitRow {
  long n = 0;
  BoundedValue semi_finite_lhs;   // the k >= -n sum at this depth
  BoundedValue bilateral_target;  // the n -> infinity value
  BoundedValue vanishing_term;    // the term identified as tending to 0 (when any)
  Real gap;                       // |semi_finite_lhs - bilateral_target|
};

struct LimitStudyResult {
  IdentityId identity = IdentityId::SEMI_6PSI6;
  ParamSet params;
  std::vector<LimitRow> rows;
};

// identity must be one of SEMI_6PSI6, SEMI_8PHI7, SEMI_10PHI9.
LimitStudyResult run_limit_study(IdentityId id, const ParamSet& params,
                                 std::span<const long> n_values, const EvalContext& ctx);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

enum class ReportFormat { json, csv, text };
std::optional<ReportFormat> format_from_string(std::string_view s);

// Numbers are serialized as full-precision decimal strings, so reports are
// lossless and byte-stable across runs and worker counts.
std::string emit_report(const SweepResult& result, ReportFormat format);
std::string emit_limit_study(const LimitStudyResult& result, ReportFormat format);

struct ParsedSample {
  long index = 0;
  std::string residual;
  bool pass = false;
  bool skipped = false;
};
struct ParsedReport {
  std::string identity;
  std::uint64_t seed = 0;
  int precision = 0;
  std::vector<ParsedSample> samples;
  std::string max_residual;
};
ParsedReport parse_report_json(std::string_view json_text);

// Limit-study parameters from a JSON object of decimal strings; any letter
// not present falls back to the identity's built-in default study set.
ParamSet parse_params_json(std::string_view text, IdentityId id, const EvalContext& ctx);
ParamSet default_limit_params(IdentityId id, const EvalContext& ctx);

// Raw series evaluation from a JSON spec (the `eval` CLI entry point).
SeriesSpec parse_series_spec_json(std::string_view text, const EvalContext& ctx);

// ---------------------------------------------------------------------------
// Deterministic sampling
// ---------------------------------------------------------------------------

// Per-sample splitmix64 stream: sample i draws the same parameters no matter
// which worker runs it.
class SampleRng {
 public:
  SampleRng(std::uint64_t seed, long sample_index);
  std::uint64_t next();
  double unit();  // uniform in [0, 1)
  double range(double lo, double hi);

 private:
  std::uint64_t s_;
};

// Draws q and the identity's free letters (modulus in [0.1, 0.9]; random
// phase when complex_params). Does not apply constraints.
ParamSet draw_params(IdentityId id, SampleRng& rng, const SweepConfig& cfg,
                     const EvalContext& ctx);

}  // namespace qpsi
