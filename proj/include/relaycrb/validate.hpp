#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "relaycrb/fim.hpp"
#include "relaycrb/signal_model.hpp"

namespace relaycrb {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct ValidateOptions {
  int quad_nodes = 64;
  std::size_t mc_samples = 200000;
  std::uint64_t seed = 1;
  std::uint32_t flipped_terms = 0;  // OR of GammaTerm bits injected into the analytic FIM
  unsigned threads = 0;
};

struct CanonicalPoint {
  Theta theta;
  ScenarioParams scenario;
};

/// a = 0.6+0.8j, b = 1.2-0.5j, tau = 1, A = 1, P1 = P2 = 1, QPSK T1 data drawn from `seed`.
CanonicalPoint canonical_point(int M, std::size_t L, std::size_t N, double snr_db, std::uint64_t seed = 7);

/// Direct and factorized log-likelihoods over random tuples; max |difference| <= 1e-9.
CheckResult check_likelihood_equivalence(int M, std::size_t tuples, std::uint64_t seed);

/// Numeric Gaussian moments against the closed forms, 64-node rule, 1e-10 relative.
CheckResult check_quadrature_moments();

/// Every Gamma at n and 2n nodes, at two scenario points, 1e-8 relative.
CheckResult check_node_doubling(int n);

/// All expectation identities at two parameter points.
std::vector<CheckResult> check_identity_suite(std::size_t n_samples, std::uint64_t seed);

/// Entrywise comparison: distinct entries within 5 SE, structural zeros exact and within 3 SE.
CheckResult compare_fim(const FisherMatrix& analytic, const FisherMatrix& mc, const std::string& name);

/**
 * Analytic FIM against the Monte-Carlo score FIM at the canonical point
 * (L = 4, N = 8, 10 dB):
 * every distinct entry within 5 SE, structural zeros exact and within 3 SE.
 * The detail names the worst entry.
 */
CheckResult check_mc_fim(int M, std::size_t n_samples, std::uint64_t seed, int quad_nodes,
                         std::uint32_t flipped_terms = 0, unsigned threads = 0);

/// Full suite used by `validate`.
std::vector<CheckResult> run_validation(const ValidateOptions& options);

void print_checks(std::ostream& os, const std::vector<CheckResult>& checks);

}  // namespace relaycrb
