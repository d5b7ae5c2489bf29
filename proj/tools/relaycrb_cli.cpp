// relaycrb: Cramer-Rao bounds for semi-blind channel estimation in an
// amplify-and-forward two-way relay network.
//
//   relaycrb eval     --config cfg.json [--verbose]
//   relaycrb sweep    --config cfg.json --out results.csv [--strict]
//   relaycrb validate [--quad-nodes 64] [--mc-samples 200000] [--flip-term bRtau_g6]
//
// Exit status: 0 ok, 1 configuration error, 2 numerical failure (strict),
// 3 validation failure.

#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "relaycrb/config.hpp"
#include "relaycrb/errors.hpp"
#include "relaycrb/sweep.hpp"
#include "relaycrb/validate.hpp"

namespace {

using namespace relaycrb;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitValidation = 3;

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool verbose = false;
  bool strict = false;
  std::optional<int> quad_nodes;
  std::optional<std::size_t> mc_samples;
  std::string format;
  std::vector<std::string> flip_terms;
};

SweepConfig resolve(const Flags& f) {
  SweepConfig cfg = f.config_path.empty() ? SweepConfig{} : load_config(f.config_path);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.out.empty()) cfg.output_path = f.out;
  if (f.quad_nodes) cfg.quad_nodes = *f.quad_nodes;
  if (f.mc_samples) cfg.mc_samples = *f.mc_samples;
  if (f.format == "csv") cfg.format = OutputFormat::csv;
  if (f.format == "json") cfg.format = OutputFormat::json;
  cfg.validate();
  return cfg;
}

// Writes through `emit` to the configured path, or stdout when none is set.
template <typename Emit>
void write_output(const std::string& path, Emit&& emit) {
  if (path.empty()) {
    emit(std::cout);
    return;
  }
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output path '" + path + "' for writing");
  emit(out);
  out.flush();
  if (!out) throw ConfigError("failed writing output path '" + path + "'");
}

int run_eval(const Flags& f) {
  const SweepConfig cfg = resolve(f);
  const EvalResult r = eval_scenario(cfg);
  write_output(cfg.output_path, [&](std::ostream& os) {
    if (cfg.format == OutputFormat::json) {
      write_eval_json(os, r, f.verbose);
    } else {
      write_eval_text(os, r, f.verbose);
    }
  });
  if (!r.report) {
    std::cerr << "relaycrb: singular Fisher matrix: " << r.failure << '\n';
    return f.strict ? kExitNumerical : kExitOk;
  }
  return kExitOk;
}

int run_sweep(const Flags& f) {
  const SweepConfig cfg = resolve(f);
  const std::vector<ResultRow> rows = sweep(cfg);
  write_output(cfg.output_path, [&](std::ostream& os) {
    if (cfg.format == OutputFormat::json) {
      write_json(os, rows);
    } else {
      write_csv(os, rows);
    }
  });
  std::size_t failures = 0;
  for (const ResultRow& r : rows) failures += r.failures;
  if (failures > 0) std::cerr << "relaycrb: " << failures << " singular realizations excluded from the means\n";
  if (has_failed_cell(rows)) {
    std::cerr << "relaycrb: at least one cell has no usable realization (reported as nan)\n";
    if (f.strict) return kExitNumerical;
  }
  return kExitOk;
}

int run_validate(const Flags& f) {
  const SweepConfig cfg = resolve(f);
  ValidateOptions o;
  o.quad_nodes = cfg.quad_nodes;
  o.mc_samples = cfg.mc_samples;
  o.seed = cfg.seed;
  for (const std::string& name : f.flip_terms) {
    const auto term = parse_gamma_term(name);
    if (!term) throw ConfigError("--flip-term: unknown term '" + name + "'");
    o.flipped_terms |= static_cast<std::uint32_t>(*term);
  }
  const std::vector<CheckResult> checks = run_validation(o);
  bool ok = true;
  for (const CheckResult& c : checks) ok = ok && c.pass;
  write_output(cfg.output_path, [&](std::ostream& os) { print_checks(os, checks); });
  return ok ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cramer-Rao bounds for semi-blind channel estimation in two-way relay networks"};
  app.require_subcommand(1);
  Flags f;

  auto add_common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config_path, "JSON configuration file")->check(CLI::ExistingFile);
    sub->add_option("--seed", f.seed, "Root seed (overrides config)");
    sub->add_option("--out", f.out, "Output path (default stdout)");
    sub->add_flag("--verbose", f.verbose, "Include Gamma values and condition number");
    sub->add_flag("--strict", f.strict, "Exit 2 on numerical failure");
    sub->add_option("--quad-nodes", f.quad_nodes, "Quadrature nodes per panel (per axis on the small-|b| path)")->check(CLI::Range(2, 128));
    sub->add_option("--mc-samples", f.mc_samples, "Monte-Carlo samples for validate");
    sub->add_option("--format", f.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
  };

  CLI::App* eval = app.add_subcommand("eval", "Bounds for a single scenario");
  CLI::App* sweep_cmd = app.add_subcommand("sweep", "Bounds averaged over channel realizations, one row per cell");
  CLI::App* validate = app.add_subcommand("validate", "Self-checks against Monte-Carlo and closed-form oracles");
  add_common(eval);
  add_common(sweep_cmd);
  add_common(validate);
  validate->add_option("--flip-term", f.flip_terms, "Negate a Gamma term of the analytic FIM (mutation check)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (eval->parsed()) return run_eval(f);
    if (sweep_cmd->parsed()) return run_sweep(f);
    return run_validate(f);
  } catch (const ConfigError& e) {
    std::cerr << "relaycrb: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "relaycrb: invalid scenario: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "relaycrb: numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}
