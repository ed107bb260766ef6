#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "qpsi/harness.hpp"

namespace {

using namespace qpsi;

int default_digits() {
  if (const char* env = std::getenv("QPSI_PRECISION")) {
    int d = std::atoi(env);
    if (d >= 20) return d;
    std::cerr << "warning: ignoring QPSI_PRECISION='" << env << "' (need an integer >= 20)\n";
  }
  return 50;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& out_path, const std::string& text) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot open output file: " + out_path);
  out << text;
}

IdentityId parse_identity(const std::string& name) {
  auto id = identity_from_string(name);
  if (!id) throw ConfigError("unknown identity '" + name + "' (see `qpsi list`)");
  return *id;
}

ReportFormat parse_format(const std::string& name) {
  auto f = format_from_string(name);
  if (!f) throw ConfigError("unknown format '" + name + "'");
  return *f;
}

int cmd_list() {
  std::printf("%-17s %-8s %-9s  %s\n", "id", "free", "derived", "description");
  for (const auto& info : identity_registry()) {
    std::string free(info.free_letters);
    if (info.semi_finite) free += "+n";
    std::printf("%-17s %-8s %-9s  %s\n", std::string(info.name).c_str(), free.c_str(),
                std::string(info.derived_letters.empty() ? "-" : info.derived_letters).c_str(),
                std::string(info.summary).c_str());
    std::printf("%-17s %-8s %-9s  constraint: %s\n", "", "", "", std::string(info.constraint).c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"qpsi: certified numerical verification of bilateral basic hypergeometric identities"};
  app.require_subcommand(1);

  auto* list_cmd = app.add_subcommand("list", "show the identity catalog");

  auto* verify_cmd = app.add_subcommand("verify", "randomized verification sweep for one identity");
  std::string v_identity, v_format = "text", v_out, v_n_values;
  SweepConfig cfg;
  cfg.precision_digits = default_digits();
  verify_cmd->add_option("--identity", v_identity, "identity id (see `qpsi list`)")->required();
  verify_cmd->add_option("--samples", cfg.samples, "number of samples");
  verify_cmd->add_option("--seed", cfg.seed, "RNG seed");
  verify_cmd->add_option("--digits", cfg.precision_digits, "decimal working precision");
  verify_cmd->add_option("--q-min", cfg.q_min, "lower end of the q range");
  verify_cmd->add_option("--q-max", cfg.q_max, "upper end of the q range");
  verify_cmd->add_flag("--complex", cfg.complex_params, "draw complex parameters (random phases)");
  verify_cmd->add_option("--n", v_n_values, "comma-separated n values for semi-finite identities");
  verify_cmd->add_option("--tolerance", cfg.tolerance, "pass/fail residual tolerance");
  verify_cmd->add_option("--max-terms", cfg.max_terms, "per-direction series term limit");
  verify_cmd->add_option("--jobs", cfg.jobs, "worker threads");
  verify_cmd->add_option("--format", v_format, "json|csv|text");
  verify_cmd->add_option("--out", v_out, "write the report to a file");

  auto* limit_cmd = app.add_subcommand("limit", "semi-finite -> bilateral limit study");
  std::string l_identity, l_format = "text", l_out, l_params, l_n_values;
  long l_n_max = 40;
  int l_digits = default_digits();
  limit_cmd->add_option("--identity", l_identity, "SEMI_6PSI6, SEMI_8PHI7 or SEMI_10PHI9")->required();
  limit_cmd->add_option("--n-max", l_n_max, "largest depth n");
  limit_cmd->add_option("--n-values", l_n_values, "explicit comma-separated n list");
  limit_cmd->add_option("--params", l_params, "JSON file of parameter decimal strings");
  limit_cmd->add_option("--digits", l_digits, "decimal working precision");
  limit_cmd->add_option("--format", l_format, "json|csv|text");
  limit_cmd->add_option("--out", l_out, "write the study to a file");

  auto* eval_cmd = app.add_subcommand("eval", "evaluate a raw series spec (debugging)");
  std::string e_spec, e_format = "text", e_out;
  int e_digits = default_digits();
  eval_cmd->add_option("--series-spec", e_spec, "JSON series spec file")->required();
  eval_cmd->add_option("--digits", e_digits, "decimal working precision");
  eval_cmd->add_option("--format", e_format, "json|text");
  eval_cmd->add_option("--out", e_out, "write the result to a file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list_cmd->parsed()) return cmd_list();

    if (verify_cmd->parsed()) {
      cfg.identity = parse_identity(v_identity);
      if (!v_n_values.empty()) {
        std::stringstream ss(v_n_values);
        std::string item;
        while (std::getline(ss, item, ',')) cfg.n_values.push_back(std::stol(item));
      }
      SweepResult result = run_sweep(cfg);
      write_output(v_out, emit_report(result, parse_format(v_format)));
      return result.summary.failures > 0 ? 1 : 0;
    }

    if (limit_cmd->parsed()) {
      IdentityId id = parse_identity(l_identity);
      EvalContext ctx = EvalContext::with_digits(l_digits);
      ParamSet ps = l_params.empty() ? default_limit_params(id, ctx)
                                     : parse_params_json(read_file(l_params), id, ctx);
      std::vector<long> ns;
      if (!l_n_values.empty()) {
        std::stringstream ss(l_n_values);
        std::string item;
        while (std::getline(ss, item, ',')) ns.push_back(std::stol(item));
      } else {
        for (long n : {1L, 2L, 5L, 10L, 20L, 30L, 40L, 50L, 60L}) {
          if (n <= l_n_max) ns.push_back(n);
        }
        if (ns.empty() || ns.back() != l_n_max) ns.push_back(l_n_max);
      }
      LimitStudyResult result = run_limit_study(id, ps, ns, ctx);
      write_output(l_out, emit_limit_study(result, parse_format(l_format)));
      return 0;
    }

    if (eval_cmd->parsed()) {
      EvalContext ctx = EvalContext::with_digits(e_digits);
      SeriesSpec spec = parse_series_spec_json(read_file(e_spec), ctx);
      EvalResult r = eval_series(spec, ctx);
      if (e_format == "json") {
        nlohmann::ordered_json j;
        j["value"] = {{"re", r.value.value.re.to_string_exact()},
                      {"im", r.value.value.im.to_string_exact()}};
        j["abs_err"] = r.value.abs_err.to_string_exact();
        j["terms_up"] = r.terms_up;
        j["terms_down"] = r.terms_down;
        j["tail_bound"] = r.tail_bound.to_string_exact();
        j["converged"] = r.converged;
        write_output(e_out, j.dump(2) + "\n");
      } else {
        std::ostringstream os;
        os << "value     " << r.value.value.re.to_string(30);
        if (!r.value.value.im.is_zero()) os << " + " << r.value.value.im.to_string(30) << " i";
        os << "\nabs_err   " << r.value.abs_err.to_string(6) << "\nterms     " << r.terms_up
           << " up, " << r.terms_down << " down\ntail      " << r.tail_bound.to_string(6)
           << "\nconverged " << (r.converged ? "yes" : "no") << "\n";
        write_output(e_out, os.str());
      }
      return 0;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const ConstraintViolation& e) {
    std::cerr << "constraint error: " << e.what() << "\n";
    return 2;
  } catch (const NoConvergence& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const PoleError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const DivisionNearZero& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
