#include "relaycrb/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <json.hpp>
#include <limits>
#include <ostream>

#include "relaycrb/errors.hpp"
#include "relaycrb/parallel.hpp"

namespace relaycrb {

namespace {

struct Cell {
  Mode mode;
  int M;
  double snr_db;
  std::size_t N;
};

std::vector<Cell> cells_of(const SweepConfig& cfg) {
  std::vector<Cell> cells;
  for (int M : cfg.M_list) {
    for (double snr : cfg.snr_db) {
      for (Mode mode : cfg.modes) {
        switch (mode) {
          case Mode::semi_blind:
            for (std::size_t n : cfg.N_list) cells.push_back({mode, M, snr, n});
            break;
          case Mode::pilot_only:
            cells.push_back({mode, M, snr, 0});
            break;
          case Mode::blind:
            cells.push_back({mode, M, snr, cfg.N_blind});
            break;
        }
      }
    }
  }
  return cells;
}

std::size_t pool_length(const SweepConfig& cfg) {
  std::size_t n = cfg.N_blind;
  for (std::size_t v : cfg.N_list) n = std::max(n, v);
  return n;
}

struct Draw {
  Theta theta;
  CVector s1;
};

Draw realization(const SweepConfig& cfg, std::uint64_t r) {
  Rng rng = make_rng(cfg.seed, r);
  const ChannelRealization ch = sample_channels(rng, cfg.rho);
  const ConstellationSpec spec1 = build_constellation(half_log_order(cfg.M1), cfg.P1);
  CVector s1 = draw_symbols(rng, spec1, pool_length(cfg));
  return {cfg.channel ? derive_theta(*cfg.channel) : derive_theta(ch), std::move(s1)};
}

}  // namespace

std::string format_value(double v) {
  if (std::isnan(v)) return "nan";
  char buf[64];
  if (v != 0.0 && std::abs(v) < 1e-3) {
    std::snprintf(buf, sizeof buf, "%.9e", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.10g", v);
  }
  return buf;
}

std::vector<ResultRow> sweep(const SweepConfig& cfg, unsigned threads) {
  cfg.validate();
  const std::vector<Cell> cells = cells_of(cfg);
  const QuadRule& rule = hermite_rule(cfg.quad_nodes);
  const std::size_t R = cfg.realizations;

  // results[r][c]; empty on a singular or ill-conditioned FIM.
  std::vector<std::vector<std::optional<CrbReport>>> results(R, std::vector<std::optional<CrbReport>>(cells.size()));
  parallel_for(
      R,
      [&](std::size_t r) {
        const Draw d = realization(cfg, r);
        for (std::size_t c = 0; c < cells.size(); ++c) {
          const Cell& cell = cells[c];
          const ScenarioParams sc = make_scenario(cfg, cell.M, cell.snr_db, cell.mode, cell.N, d.s1);
          try {
            results[r][c] = bounds(d.theta, sc, rule);
          } catch (const NumericalError&) {
            results[r][c].reset();
          }
        }
      },
      threads);

  std::vector<ResultRow> rows;
  rows.reserve(cells.size());
  for (std::size_t c = 0; c < cells.size(); ++c) {
    ResultRow row;
    row.mode = cells[c].mode;
    row.M = cells[c].M;
    row.snr_db = cells[c].snr_db;
    row.N = cells[c].N;
    row.L = cells[c].mode == Mode::blind ? 0 : cfg.L;
    double sa = 0.0, sb = 0.0, ma = 0.0, mb = 0.0;
    for (std::size_t r = 0; r < R; ++r) {
      const auto& rep = results[r][c];
      if (!rep) {
        ++row.failures;
        continue;
      }
      ++row.realizations_used;
      sa += rep->crb_a;
      sb += rep->crb_b;
      ma += rep->mcrb_a;
      mb += rep->mcrb_b;
    }
    if (row.realizations_used == 0) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.crb_a = row.crb_b = row.mcrb_a = row.mcrb_b = nan;
    } else {
      const double n = static_cast<double>(row.realizations_used);
      row.crb_a = sa / n;
      row.crb_b = sb / n;
      row.mcrb_a = ma / n;
      row.mcrb_b = mb / n;
    }
    rows.push_back(row);
  }
  return rows;
}

bool has_failed_cell(const std::vector<ResultRow>& rows) {
  return std::any_of(rows.begin(), rows.end(), [](const ResultRow& r) { return r.realizations_used == 0; });
}

void write_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << kCsvHeader << '\n';
  for (const ResultRow& r : rows) {
    os << to_string(r.mode) << ',' << r.M << ',' << format_value(r.snr_db) << ',' << r.N << ',' << r.L << ','
       << format_value(r.crb_a) << ',' << format_value(r.crb_b) << ',' << format_value(r.mcrb_a) << ','
       << format_value(r.mcrb_b) << ',' << r.realizations_used << ',' << r.failures << '\n';
  }
}

void write_json(std::ostream& os, const std::vector<ResultRow>& rows) {
  nlohmann::ordered_json arr = nlohmann::ordered_json::array();
  auto num = [](double v) -> nlohmann::ordered_json {
    if (std::isnan(v)) return nullptr;
    return v;
  };
  for (const ResultRow& r : rows) {
    nlohmann::ordered_json o;
    o["mode"] = std::string(to_string(r.mode));
    o["M"] = r.M;
    o["snr_db"] = r.snr_db;
    o["N"] = r.N;
    o["L"] = r.L;
    o["crb_a"] = num(r.crb_a);
    o["crb_b"] = num(r.crb_b);
    o["mcrb_a"] = num(r.mcrb_a);
    o["mcrb_b"] = num(r.mcrb_b);
    o["realizations_used"] = r.realizations_used;
    o["failures"] = r.failures;
    arr.push_back(std::move(o));
  }
  os << arr.dump(2) << '\n';
}

EvalResult eval_scenario(const SweepConfig& cfg) {
  cfg.validate();
  const Mode mode = cfg.modes.front();
  const std::size_t N = mode == Mode::blind ? cfg.N_blind : cfg.N_list.front();
  const Draw d = realization(cfg, 0);
  EvalResult out;
  out.theta = d.theta;
  out.scenario = make_scenario(cfg, cfg.M_list.front(), cfg.snr_db.front(), mode, N, d.s1);
  try {
    out.report = bounds(out.theta, out.scenario, hermite_rule(cfg.quad_nodes), true);
  } catch (const NumericalError& e) {
    out.failure = e.what();
  }
  return out;
}

void write_eval_text(std::ostream& os, const EvalResult& r, bool verbose) {
  const ScenarioParams& sc = r.scenario;
  os << "mode: " << to_string(mode_of(sc)) << '\n';
  os << "M: " << sc.spec2.order() << '\n';
  os << "snr_db: " << format_value(10.0 * std::log10(sc.P2 / sc.sigma2)) << '\n';
  os << "N: " << sc.N() << '\n';
  os << "L: " << sc.L() << '\n';
  os << "a: " << format_value(r.theta.a_R) << ' ' << format_value(r.theta.a_I) << '\n';
  os << "b: " << format_value(r.theta.b_R) << ' ' << format_value(r.theta.b_I) << '\n';
  os << "tau: " << format_value(r.theta.tau) << '\n';
  os << "C: " << format_value(effective_noise(r.theta, sc.A, sc.sigma2)) << '\n';
  if (!r.report) {
    os << "status: singular\n";
    os << "reason: " << r.failure << '\n';
    return;
  }
  const CrbReport& rep = *r.report;
  os << "status: ok\n";
  os << "crb_a: " << format_value(rep.crb_a) << '\n';
  os << "crb_b: " << format_value(rep.crb_b) << '\n';
  os << "mcrb_a: " << format_value(rep.mcrb_a) << '\n';
  os << "mcrb_b: " << format_value(rep.mcrb_b) << '\n';
  if (verbose) {
    os << "condition_number: " << format_value(rep.condition_number) << '\n';
    if (rep.gammas) {
      const auto g = rep.gammas->as_array();
      for (std::size_t i = 0; i < g.size(); ++i) os << "gamma" << i + 1 << ": " << format_value(g[i]) << '\n';
    }
  }
}

void write_eval_json(std::ostream& os, const EvalResult& r, bool verbose) {
  const ScenarioParams& sc = r.scenario;
  nlohmann::ordered_json o;
  o["mode"] = std::string(to_string(mode_of(sc)));
  o["M"] = sc.spec2.order();
  o["snr_db"] = 10.0 * std::log10(sc.P2 / sc.sigma2);
  o["N"] = sc.N();
  o["L"] = sc.L();
  o["a"] = {r.theta.a_R, r.theta.a_I};
  o["b"] = {r.theta.b_R, r.theta.b_I};
  o["tau"] = r.theta.tau;
  o["C"] = effective_noise(r.theta, sc.A, sc.sigma2);
  if (!r.report) {
    o["status"] = "singular";
    o["reason"] = r.failure;
  } else {
    const CrbReport& rep = *r.report;
    o["status"] = "ok";
    o["crb_a"] = rep.crb_a;
    o["crb_b"] = rep.crb_b;
    o["mcrb_a"] = rep.mcrb_a;
    o["mcrb_b"] = rep.mcrb_b;
    if (verbose) {
      o["condition_number"] = rep.condition_number;
      if (rep.gammas) o["gammas"] = rep.gammas->as_array();
    }
  }
  os << o.dump(2) << '\n';
}

}  // namespace relaycrb
