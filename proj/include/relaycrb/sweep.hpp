#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "relaycrb/config.hpp"
#include "relaycrb/fim.hpp"

namespace relaycrb {

/// One averaged cell. Bounds are NaN when every realization failed.
struct ResultRow {
  Mode mode = Mode::semi_blind;
  int M = 4;
  double snr_db = 0.0;
  std::size_t N = 0;
  std::size_t L = 0;
  double crb_a = 0.0;
  double crb_b = 0.0;
  double mcrb_a = 0.0;
  double mcrb_b = 0.0;
  std::size_t realizations_used = 0;
  std::size_t failures = 0;
};

inline constexpr const char* kCsvHeader = "mode,M,snr_db,N,L,crb_a,crb_b,mcrb_a,mcrb_b,realizations_used,failures";

/**
 * Averages bounds over channel realizations. Realization r draws its channels
 * and then its T1 data from make_rng(seed, r), so every cell sees the same
 * draws. Rows are ordered by M, then SNR, then mode as listed in the config;
 * semi-blind expands over N, pilot-only and blind appear once per (M, SNR).
 */
std::vector<ResultRow> sweep(const SweepConfig& cfg, unsigned threads = 0);

bool has_failed_cell(const std::vector<ResultRow>& rows);

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_json(std::ostream& os, const std::vector<ResultRow>& rows);

/// Number formatting used in CSV output: scientific below 1e-3, "nan" for the failure sentinel.
std::string format_value(double v);

struct EvalResult {
  Theta theta;
  ScenarioParams scenario;
  std::optional<CrbReport> report;  // empty when the FIM was singular
  std::string failure;              // reason when report is empty
};

/// Single scenario from the first mode, M, SNR and N of the config. Uses the
/// explicit channel when given, otherwise realization 0 of the sweep.
EvalResult eval_scenario(const SweepConfig& cfg);

void write_eval_text(std::ostream& os, const EvalResult& r, bool verbose);
void write_eval_json(std::ostream& os, const EvalResult& r, bool verbose);

}  // namespace relaycrb
