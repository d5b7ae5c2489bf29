#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "relaycrb/fim.hpp"
#include "relaycrb/signal_model.hpp"

namespace relaycrb {

enum class OutputFormat { csv, json };

/**
 * Run configuration shared by `eval`, `sweep` and `validate`. Every field has
 * a default, so `{}` is a valid document. JSON schema (all keys optional):
 *
 *   modes         ["semi_blind", "pilot_only", "blind"]     default ["semi_blind", "pilot_only"]
 *   M_list        [4, 16, 64, 256]   square QAM orders of T2 data
 *   snr_db        [0, 10] or {"start": 0, "stop": 30, "step": 5}   10 log10(P2 / sigma2)
 *   N             32 or [8, 16, 32, 64]   semi-blind data lengths
 *   N_blind       40        data length of blind rows
 *   L             8         pilot length (even)
 *   realizations  100
 *   rho           0.3       correlation of (h1, h2) and of (g1, g2)
 *   seed          1
 *   A             1.0
 *   P1, P2        P1 defaults to P2; P2 defaults to 1
 *   M1            4         square QAM order of T1 data
 *   quad_nodes    64
 *   mc_samples    200000    validate only
 *   output_path   ""        empty: stdout
 *   format        "csv" | "json"
 *   channel       {"h1": [re, im], "h2": [...], "g1": [...], "g2": [...]}   eval only
 */
struct SweepConfig {
  std::vector<Mode> modes = {Mode::semi_blind, Mode::pilot_only};
  std::vector<int> M_list = {4, 16, 64, 256};
  std::vector<double> snr_db = {0, 5, 10, 15, 20, 25, 30};
  std::vector<std::size_t> N_list = {32};
  std::size_t N_blind = 40;
  std::size_t L = 8;
  std::size_t realizations = 100;
  double rho = 0.3;
  std::uint64_t seed = 1;
  double A = 1.0;
  double P1 = 1.0;
  double P2 = 1.0;
  int M1 = 4;
  int quad_nodes = 64;
  std::size_t mc_samples = 200000;
  std::string output_path;
  OutputFormat format = OutputFormat::csv;
  std::optional<ChannelRealization> channel;

  /// Field-level checks; throws ConfigError.
  void validate() const;
};

/// Parses a JSON document; throws ConfigError naming the offending field.
SweepConfig parse_config(const std::string& json_text);
SweepConfig load_config(const std::string& path);

/// Scenario for one cell: pilots, T1 data prefix and noise level for the given mode.
ScenarioParams make_scenario(const SweepConfig& cfg, int M, double snr_db, Mode mode, std::size_t N,
                             const CVector& s1_pool);

}  // namespace relaycrb
