#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "relaycrb/fim.hpp"
#include "relaycrb/likelihood.hpp"
#include "relaycrb/signal_model.hpp"

namespace relaycrb {

/// Running mean / variance (Welford), mergeable in a fixed order.
class RunningStats {
 public:
  void add(double x);
  void merge(const RunningStats& other);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;
  /// Standard error of the mean; zero for fewer than two samples.
  double standard_error() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct McOptions {
  LikelihoodMethod method = LikelihoodMethod::factorized;
  std::size_t chunk_size = 2000;  // samples per independent RNG stream
  unsigned threads = 0;           // 0: hardware concurrency
};

/**
 * Monte-Carlo Fisher matrix E[score score^T], with the score taken by central
 * finite differences of log_likelihood (step 1e-5 max(|theta_i|, 1)). Data
 * symbols s2 are redrawn for every sample; s1 and the pilots stay fixed.
 * Requires n_samples >= 1e4. Results depend only on (inputs, root_seed).
 */
FisherMatrix mc_fim(const Theta& theta, const ScenarioParams& sc, std::size_t n_samples, std::uint64_t root_seed,
                    const McOptions& options = {});

/// Number of rejected (non-finite) samples from the most recent mc_fim call on this thread.
std::size_t mc_fim_last_rejections();

struct IdentityReport {
  std::string name;
  double analytic = 0.0;
  double mc_estimate = 0.0;
  double mc_se = 0.0;
  double z_score = 0.0;
  bool pass = false;
};

inline constexpr double kIdentityZThreshold = 4.0;
inline constexpr double kFimZThreshold = 5.0;

/**
 * Compares closed-form expectations over one data observation with sample
 * means: per-level cosh / sinh ratio moments and the expected curvature
 * terms for a_R, b_R and tau. Requires n_samples >= 1e5 and |b| > 1e-6.
 */
std::vector<IdentityReport> check_identities(const Theta& theta, const ScenarioParams& sc, std::size_t n_samples,
                                             std::uint64_t root_seed);

}  // namespace relaycrb
