#include "relaycrb/config.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "relaycrb/errors.hpp"

namespace relaycrb {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& why) {
  throw ConfigError("config field '" + field + "': " + why);
}

double get_real(const json& j, const std::string& field) {
  if (!j.is_number()) bad(field, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(field, "must be finite");
  return v;
}

std::uint64_t get_count(const json& j, const std::string& field) {
  if (!j.is_number_integer()) bad(field, "expected an integer");
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  const auto v = j.get<std::int64_t>();
  if (v < 0) bad(field, "must be non-negative");
  return static_cast<std::uint64_t>(v);
}

cplx get_complex(const json& j, const std::string& field) {
  if (!j.is_array() || j.size() != 2) bad(field, "expected [re, im]");
  return {get_real(j[0], field + "[0]"), get_real(j[1], field + "[1]")};
}

std::vector<double> get_snr(const json& j) {
  std::vector<double> out;
  if (j.is_number()) {
    out.push_back(get_real(j, "snr_db"));
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(get_real(j[i], "snr_db[" + std::to_string(i) + "]"));
  } else if (j.is_object()) {
    for (const char* k : {"start", "stop", "step"}) {
      if (!j.contains(k)) bad(std::string("snr_db.") + k, "missing");
    }
    const double start = get_real(j["start"], "snr_db.start");
    const double stop = get_real(j["stop"], "snr_db.stop");
    const double step = get_real(j["step"], "snr_db.step");
    if (!(step > 0.0)) bad("snr_db.step", "must be positive");
    if (stop < start) bad("snr_db.stop", "must not be below start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    if (n > 10000) bad("snr_db", "range has too many points");
    for (std::size_t i = 0; i < n; ++i) out.push_back(start + static_cast<double>(i) * step);
  } else {
    bad("snr_db", "expected a number, a list or {start, stop, step}");
  }
  return out;
}

}  // namespace

void SweepConfig::validate() const {
  if (modes.empty()) bad("modes", "must not be empty");
  if (M_list.empty()) bad("M_list", "must not be empty");
  for (int M : M_list) {
    try {
      half_log_order(M);
    } catch (const DomainError&) {
      bad("M_list", std::to_string(M) + " is not a square QAM order 4^p (p = 1..8)");
    }
  }
  try {
    half_log_order(M1);
  } catch (const DomainError&) {
    bad("M1", std::to_string(M1) + " is not a square QAM order 4^p (p = 1..8)");
  }
  if (snr_db.empty()) bad("snr_db", "must not be empty");
  if (N_list.empty()) bad("N", "must not be empty");
  if (realizations < 1) bad("realizations", "must be at least 1");
  if (!(rho >= 0.0 && rho < 1.0)) bad("rho", "must lie in [0, 1)");
  if (!(A > 0.0)) bad("A", "must be positive");
  if (!(P1 > 0.0)) bad("P1", "must be positive");
  if (!(P2 > 0.0)) bad("P2", "must be positive");
  if (quad_nodes < 2 || quad_nodes > 128) bad("quad_nodes", "must lie in [2, 128]");
  for (Mode m : modes) {
    if ((m == Mode::semi_blind || m == Mode::pilot_only) && (L < 2 || L % 2 != 0)) {
      bad("L", "must be even and at least 2 when pilots are used");
    }
    if (m == Mode::blind && N_blind < 1) bad("N_blind", "must be at least 1");
    if (m == Mode::semi_blind) {
      for (std::size_t n : N_list) {
        if (n < 1) bad("N", "semi-blind data lengths must be at least 1");
      }
    }
  }
}

SweepConfig parse_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config must be a JSON object");

  static const char* known[] = {"modes", "M_list",     "snr_db", "N",          "N_blind",     "L",
                                "realizations", "rho", "seed",   "A",          "P1",          "P2",
                                "M1",    "quad_nodes", "mc_samples", "output_path", "format", "channel"};
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) bad(key, "unknown field");
  }

  SweepConfig c;
  if (j.contains("modes")) {
    const json& m = j["modes"];
    if (!m.is_array()) bad("modes", "expected a list of mode names");
    c.modes.clear();
    for (const auto& v : m) {
      if (!v.is_string()) bad("modes", "expected mode names");
      try {
        c.modes.push_back(parse_mode(v.get<std::string>()));
      } catch (const ConfigError& e) {
        bad("modes", e.what());
      }
    }
  }
  if (j.contains("M_list")) {
    const json& m = j["M_list"];
    c.M_list.clear();
    if (m.is_number_integer()) {
      c.M_list.push_back(static_cast<int>(get_count(m, "M_list")));
    } else if (m.is_array()) {
      for (const auto& v : m) c.M_list.push_back(static_cast<int>(get_count(v, "M_list")));
    } else {
      bad("M_list", "expected an integer or a list of integers");
    }
  }
  if (j.contains("snr_db")) c.snr_db = get_snr(j["snr_db"]);
  if (j.contains("N")) {
    const json& n = j["N"];
    c.N_list.clear();
    if (n.is_array()) {
      for (const auto& v : n) c.N_list.push_back(get_count(v, "N"));
    } else {
      c.N_list.push_back(get_count(n, "N"));
    }
  }
  if (j.contains("N_blind")) c.N_blind = get_count(j["N_blind"], "N_blind");
  if (j.contains("L")) c.L = get_count(j["L"], "L");
  if (j.contains("realizations")) c.realizations = get_count(j["realizations"], "realizations");
  if (j.contains("rho")) c.rho = get_real(j["rho"], "rho");
  if (j.contains("seed")) c.seed = get_count(j["seed"], "seed");
  if (j.contains("A")) c.A = get_real(j["A"], "A");
  if (j.contains("P2")) c.P2 = get_real(j["P2"], "P2");
  c.P1 = j.contains("P1") ? get_real(j["P1"], "P1") : c.P2;
  if (j.contains("M1")) c.M1 = static_cast<int>(get_count(j["M1"], "M1"));
  if (j.contains("quad_nodes")) c.quad_nodes = static_cast<int>(get_count(j["quad_nodes"], "quad_nodes"));
  if (j.contains("mc_samples")) c.mc_samples = get_count(j["mc_samples"], "mc_samples");
  if (j.contains("output_path")) {
    if (!j["output_path"].is_string()) bad("output_path", "expected a string");
    c.output_path = j["output_path"].get<std::string>();
  }
  if (j.contains("format")) {
    const json& f = j["format"];
    if (f == "csv") {
      c.format = OutputFormat::csv;
    } else if (f == "json") {
      c.format = OutputFormat::json;
    } else {
      bad("format", "expected \"csv\" or \"json\"");
    }
  }
  if (j.contains("channel")) {
    const json& ch = j["channel"];
    if (!ch.is_object()) bad("channel", "expected an object with h1, h2, g1, g2");
    ChannelRealization r{};
    for (const char* k : {"h1", "h2", "g1"}) {
      if (!ch.contains(k)) bad(std::string("channel.") + k, "missing");
    }
    r.h1 = get_complex(ch["h1"], "channel.h1");
    r.h2 = get_complex(ch["h2"], "channel.h2");
    r.g1 = get_complex(ch["g1"], "channel.g1");
    r.g2 = ch.contains("g2") ? get_complex(ch["g2"], "channel.g2") : cplx(0.0, 0.0);
    c.channel = r;
  }
  c.validate();
  return c;
}

SweepConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

ScenarioParams make_scenario(const SweepConfig& cfg, int M, double snr_db, Mode mode, std::size_t N,
                             const CVector& s1_pool) {
  ScenarioParams sc;
  sc.A = cfg.A;
  sc.P1 = cfg.P1;
  sc.P2 = cfg.P2;
  sc.sigma2 = snr_to_sigma2(snr_db, cfg.P2);
  sc.spec2 = build_constellation(half_log_order(M), cfg.P2);
  if (mode != Mode::blind) {
    auto [t1, t2] = make_pilots(cfg.L, cfg.P1, cfg.P2);
    sc.t1 = std::move(t1);
    sc.t2 = std::move(t2);
  }
  const std::size_t n = mode == Mode::pilot_only ? 0 : N;
  if (n > s1_pool.size()) throw DomainError("make_scenario: T1 data pool shorter than N");
  sc.s1.assign(s1_pool.begin(), s1_pool.begin() + static_cast<std::ptrdiff_t>(n));
  sc.validate();
  return sc;
}

}  // namespace relaycrb
