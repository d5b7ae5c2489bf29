#include "relaycrb/validate.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <random>

#include "relaycrb/likelihood.hpp"
#include "relaycrb/oracle.hpp"
#include "relaycrb/quadrature.hpp"

namespace relaycrb {

namespace {

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double rel_err(double x, double ref) { return std::abs(x - ref) / std::max(std::abs(ref), 1e-30); }

}  // namespace

CanonicalPoint canonical_point(int M, std::size_t L, std::size_t N, double snr_db, std::uint64_t seed) {
  CanonicalPoint cp;
  cp.theta = Theta::from_complex({0.6, 0.8}, {1.2, -0.5}, 1.0);
  ScenarioParams& sc = cp.scenario;
  sc.A = 1.0;
  sc.P1 = 1.0;
  sc.P2 = 1.0;
  sc.sigma2 = snr_to_sigma2(snr_db, sc.P2);
  sc.spec2 = build_constellation(half_log_order(M), sc.P2);
  if (L > 0) {
    auto [t1, t2] = make_pilots(L, sc.P1, sc.P2);
    sc.t1 = std::move(t1);
    sc.t2 = std::move(t2);
  }
  Rng rng = make_rng(seed, 0);
  sc.s1 = draw_symbols(rng, build_constellation(1, sc.P1), N);
  sc.validate();
  return cp;
}

CheckResult check_likelihood_equivalence(int M, std::size_t tuples, std::uint64_t seed) {
  double worst = 0.0;
  for (std::size_t k = 0; k < tuples; ++k) {
    Rng rng = make_rng(seed, k);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const Theta theta = Theta::from_complex(sample_cn(rng), sample_cn(rng), 0.05 + 2.0 * unif(rng));
    ScenarioParams sc;
    sc.A = 0.5 + unif(rng);
    sc.P2 = 0.5 + unif(rng);
    sc.P1 = sc.P2;
    sc.sigma2 = snr_to_sigma2(-5.0 + 35.0 * unif(rng), sc.P2);
    sc.spec2 = build_constellation(half_log_order(M), sc.P2);
    const std::size_t L = 2 * std::uniform_int_distribution<std::size_t>(0, 4)(rng);
    const std::size_t N = std::uniform_int_distribution<std::size_t>(1, 16)(rng);
    if (L > 0) {
      auto [t1, t2] = make_pilots(L, sc.P1, sc.P2);
      sc.t1 = std::move(t1);
      sc.t2 = std::move(t2);
    }
    sc.s1 = draw_symbols(rng, build_constellation(1, sc.P1), N);
    const CVector s2 = draw_symbols(rng, sc.spec2, N);
    const Observation obs = simulate_observation(rng, theta, sc, s2);
    const double d = log_likelihood(obs, theta, sc, LikelihoodMethod::direct);
    const double f = log_likelihood(obs, theta, sc, LikelihoodMethod::factorized);
    worst = std::max(worst, std::isfinite(d - f) ? std::abs(d - f) : INFINITY);
  }
  return {"likelihood_equivalence[M=" + std::to_string(M) + "]", worst <= 1e-9,
          fmt("max |direct - factorized| = %.3e over ", worst) + std::to_string(tuples) + " tuples"};
}

CheckResult check_quadrature_moments() {
  const QuadRule& rule = hermite_rule(64);
  double worst = 0.0;
  for (int order : {0, 1, 2}) {
    for (double alpha : {0.5, 1.0, 2.0}) {
      for (double delta : {0.0, 0.3, 1.0}) {
        // Integral of t^k e^{-alpha t^2 - 2 delta t} dt = sqrt(pi / alpha) E[t^k e^{-2 delta t}], t ~ N(0, 1/(2 alpha)).
        const double s2 = 1.0 / alpha;
        const double numeric = std::sqrt(std::numbers::pi * s2) *
                               expect_1d([&](double t) { return std::pow(t, order) * std::exp(-2.0 * delta * t); },
                                         s2, rule);
        const double exact = gaussian_moment_integral(order, alpha, delta);
        if (exact == 0.0) {
          worst = std::max(worst, std::abs(numeric));
        } else {
          worst = std::max(worst, rel_err(numeric, exact));
        }
      }
    }
  }
  return {"quadrature_moments", worst <= 1e-10, fmt("max relative error %.3e over 27 (order, alpha, delta) points", worst)};
}

CheckResult check_node_doubling(int n) {
  double worst = 0.0;
  std::string where;
  const struct {
    int M;
    double snr;
  } points[] = {{4, 10.0}, {16, 20.0}, {64, 25.0}, {256, 30.0}};
  for (const auto& p : points) {
    const CanonicalPoint cp = canonical_point(p.M, 4, 8, p.snr);
    const auto lo = gammas(cp.theta, cp.scenario, hermite_rule(n)).as_array();
    const auto hi = gammas(cp.theta, cp.scenario, hermite_rule(2 * n)).as_array();
    for (std::size_t i = 0; i < lo.size(); ++i) {
      const double e = rel_err(lo[i], hi[i]);
      if (e > worst) {
        worst = e;
        where = "gamma" + std::to_string(i + 1) + " at M=" + std::to_string(p.M) + fmt(", %g dB", p.snr);
      }
    }
  }
  return {"node_doubling[" + std::to_string(n) + "->" + std::to_string(2 * n) + "]", worst <= 1e-8,
          fmt("max relative change %.3e", worst) + (where.empty() ? "" : " (" + where + ")")};
}

std::vector<CheckResult> check_identity_suite(std::size_t n_samples, std::uint64_t seed) {
  std::vector<CheckResult> out;
  const struct {
    int M;
    Theta theta;
    double snr;
  } points[] = {{4, Theta::from_complex({0.6, 0.8}, {1.2, -0.5}, 1.0), 10.0},
                {16, Theta::from_complex({-0.3, 0.4}, {0.7, 0.9}, 0.5), 5.0}};
  for (std::size_t k = 0; k < std::size(points); ++k) {
    CanonicalPoint cp = canonical_point(points[k].M, 4, 8, points[k].snr);
    const auto reports = check_identities(points[k].theta, cp.scenario, n_samples, seed + k);
    for (const IdentityReport& r : reports) {
      out.push_back({"identity[" + std::to_string(k + 1) + "]." + r.name, r.pass,
                     fmt("analytic %.6g, mc %.6g, z %.2f", r.analytic, r.mc_estimate, r.z_score)});
    }
  }
  return out;
}

CheckResult compare_fim(const FisherMatrix& analytic, const FisherMatrix& mc, const std::string& name) {
  if (!mc.se) return {name, false, "Monte-Carlo matrix carries no standard errors"};
  const Matrix5& se = *mc.se;
  bool pass = true;
  double worst = -1.0;
  std::string worst_name;
  for (int r = 0; r < 5; ++r) {
    for (int c = r; c < 5; ++c) {
      const bool structural = (r == 0 && c == 1) || (r == 0 && c == 4) || (r == 1 && c == 4);
      const double z = std::abs(mc.m(r, c) - analytic.m(r, c)) / se(r, c);
      // Fraction of the entry's own threshold used up; above 1 fails.
      double score = z / kFimZThreshold;
      if (structural) score = analytic.m(r, c) != 0.0 ? INFINITY : std::abs(mc.m(r, c)) / se(r, c) / 3.0;
      if (!(score <= 1.0)) pass = false;
      if (!(score <= worst)) {
        worst = score;
        worst_name = "I(" + std::string(kParamNames[r]) + "," + std::string(kParamNames[c]) + ")" +
                     fmt(": analytic %.6g, mc %.6g +- %.3g", analytic.m(r, c), mc.m(r, c), se(r, c));
      }
    }
  }
  return {name, pass, (pass ? "worst " : "FAILED entry ") + worst_name + fmt(" (%.2f of threshold)", worst)};
}

CheckResult check_mc_fim(int M, std::size_t n_samples, std::uint64_t seed, int quad_nodes, std::uint32_t flipped_terms,
                         unsigned threads) {
  const CanonicalPoint cp = canonical_point(M, 4, 8, 10.0);
  FimOptions fo;
  fo.flipped_terms = flipped_terms;
  fo.require_psd = flipped_terms == 0;
  const FisherMatrix ex = exact_fim(cp.theta, cp.scenario, hermite_rule(quad_nodes), fo);
  McOptions mo;
  mo.threads = threads;
  const FisherMatrix mc = mc_fim(cp.theta, cp.scenario, n_samples, seed, mo);
  return compare_fim(ex, mc, "mc_fim[M=" + std::to_string(M) + "]");
}

std::vector<CheckResult> run_validation(const ValidateOptions& o) {
  std::vector<CheckResult> out;
  for (int M : {4, 16, 64, 256}) out.push_back(check_likelihood_equivalence(M, 100, o.seed));
  out.push_back(check_quadrature_moments());
  out.push_back(check_node_doubling(o.quad_nodes));
  for (auto& c : check_identity_suite(std::max<std::size_t>(o.mc_samples, 100000), o.seed)) out.push_back(c);
  out.push_back(check_mc_fim(4, std::max<std::size_t>(o.mc_samples, 10000), o.seed, o.quad_nodes, o.flipped_terms,
                             o.threads));
  return out;
}

void print_checks(std::ostream& os, const std::vector<CheckResult>& checks) {
  std::size_t failed = 0;
  for (const CheckResult& c : checks) {
    os << (c.pass ? "PASS " : "FAIL ") << c.name << ": " << c.detail << '\n';
    failed += c.pass ? 0 : 1;
  }
  os << (failed == 0 ? "all " + std::to_string(checks.size()) + " checks passed"
                     : std::to_string(failed) + " of " + std::to_string(checks.size()) + " checks failed")
     << '\n';
}

}  // namespace relaycrb
