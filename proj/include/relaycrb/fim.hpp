#pragma once

#include <Eigen/Core>
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "relaycrb/quadrature.hpp"
#include "relaycrb/signal_model.hpp"

namespace relaycrb {

using Matrix5 = Eigen::Matrix<double, 5, 5>;

/// Parameter order used by every 5x5 matrix in the library.
inline constexpr std::array<std::string_view, 5> kParamNames = {"a_R", "a_I", "b_R", "b_I", "tau"};

/**
 * Gaussian-weighted expectations over one data observation that have no closed form.
 * With R = F(u), u = b_R x + b_I y, and q1, q2, q3 the b_R, b_I, tau derivatives of F(u):
 *   g1 = 4 A^2 E[(f/R)^2]   g4 = E[(q3/R)^2]
 *   g2 = E[(q1/R)^2]        g3 = E[(q2/R)^2]
 *   g5 = E[q1 q2 / R^2]     g6 = E[q3 q1 / R^2]   g7 = E[q3 q2 / R^2]
 */
struct GammaSet {
  double g1 = 0.0;
  double g2 = 0.0;
  double g3 = 0.0;
  double g4 = 0.0;
  double g5 = 0.0;
  double g6 = 0.0;
  double g7 = 0.0;

  std::array<double, 7> as_array() const { return {g1, g2, g3, g4, g5, g6, g7}; }
};

enum class Provenance { analytic, monte_carlo };

struct FisherMatrix {
  Matrix5 m = Matrix5::Zero();
  Provenance provenance = Provenance::analytic;
  std::optional<Matrix5> se;  // entrywise standard errors, Monte-Carlo only

  double min_eigenvalue() const;
  double max_eigenvalue() const;
  /// Smallest eigenvalue >= -1e-8 times the largest.
  bool is_psd() const;
};

enum class Mode { semi_blind, pilot_only, blind };

std::string_view to_string(Mode mode);
/// Throws ConfigError for unknown names.
Mode parse_mode(std::string_view name);

struct CrbReport {
  double crb_a = 0.0;
  double crb_b = 0.0;
  double mcrb_a = 0.0;
  double mcrb_b = 0.0;
  Mode mode = Mode::semi_blind;
  double condition_number = 0.0;
  std::optional<GammaSet> gammas;
};

/// Gamma-bearing terms of the exact FIM, used for sign-flip mutation checks.
enum class GammaTerm : std::uint32_t {
  aa_g1 = 1u << 0,
  bRbR_g2 = 1u << 1,
  bIbI_g3 = 1u << 2,
  tautau_g4 = 1u << 3,
  bRbI_g5 = 1u << 4,
  bRtau_g6 = 1u << 5,
  bItau_g7 = 1u << 6,
};

inline constexpr std::array<GammaTerm, 7> kAllGammaTerms = {
    GammaTerm::aa_g1,   GammaTerm::bRbR_g2,  GammaTerm::bIbI_g3, GammaTerm::tautau_g4,
    GammaTerm::bRbI_g5, GammaTerm::bRtau_g6, GammaTerm::bItau_g7};

std::string_view to_string(GammaTerm term);
std::optional<GammaTerm> parse_gamma_term(std::string_view name);

struct FimOptions {
  std::uint32_t flipped_terms = 0;  // OR of GammaTerm bits; zero in production
  bool require_psd = true;
};

/// Squared magnitude of b below which the u-domain integrals are replaced by (x, y) ones.
inline constexpr double kMinBAbs2 = 1e-12;
inline constexpr double kMaxCondition = 1e12;

/// Throws DomainError when |b|^2 < kMinBAbs2.
GammaSet gammas(const Theta& theta, const ScenarioParams& sc, const QuadRule& rule);

/// All seven expectations from the two-dimensional (x, y) mixture; regular at b = 0.
GammaSet gammas_xy(const Theta& theta, const ScenarioParams& sc, const QuadRule& rule);

FisherMatrix exact_fim(const Theta& theta, const ScenarioParams& sc, const QuadRule& rule,
                       const FimOptions& options = {});

struct CrbPair {
  double crb_a = 0.0;
  double crb_b = 0.0;
  double condition_number = 0.0;
};

/// Sums of the a and b diagonals of the inverse; throws NumericalError naming
/// `label` when the matrix is singular or its condition number exceeds 1e12.
CrbPair crb(const FisherMatrix& fim, std::string_view label = "fim");

/// FIM with the data symbols treated as deterministic and averaged afterwards.
FisherMatrix mfim(const Theta& theta, const ScenarioParams& sc);

struct McrbPair {
  double mcrb_a = 0.0;
  double mcrb_b = 0.0;
};

McrbPair mcrb(const Theta& theta, const ScenarioParams& sc);

/// Mode implied by the scenario dimensions.
Mode mode_of(const ScenarioParams& sc);

/// Exact and modified bounds for one scenario.
CrbReport bounds(const Theta& theta, const ScenarioParams& sc, const QuadRule& rule, bool keep_gammas = false);

}  // namespace relaycrb
