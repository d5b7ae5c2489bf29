#pragma once

#include <array>
#include <span>
#include <vector>

#include "relaycrb/constellation.hpp"
#include "relaycrb/signal_model.hpp"

namespace relaycrb {

/// Per-level coefficients of the per-axis mixture factor
/// F(t) = sum_i exp(-gamma_i |b|^2) cosh(2 beta_i t).
struct CoeffTable {
  std::vector<double> beta;   // A d_p (2i-1) / C
  std::vector<double> gamma;  // A^2 d_p^2 (2i-1)^2 / C
  double C = 1.0;
  double A = 1.0;
  double babs2 = 0.0;

  std::size_t levels() const { return beta.size(); }
};

CoeffTable coeffs(const ConstellationSpec& spec, double A, double C, double babs2);

/// Coefficients for theta under scenario sc (C derived from tau).
CoeffTable coeffs(const Theta& theta, const ScenarioParams& sc);

/// log F(t), evaluated with the largest exponent factored out.
double log_f_theta(double t, const CoeffTable& ct);

/**
 * F and its parameter derivatives at u = b_R x + b_I y, all multiplied by
 * exp(-log_scale) so that ratios such as q1 / F never overflow.
 *
 *   f  = sum_i beta_i e^{-gamma_i|b|^2} sinh(2 beta_i u)
 *   q1 = dF(u)/db_R,  q2 = dF(u)/db_I  (x, y held fixed)
 *   q3 = dF(u)/dtau   (u held fixed)
 */
struct FDerivs {
  double log_scale = 0.0;
  double F = 0.0;
  double f = 0.0;
  double q1 = 0.0;
  double q2 = 0.0;
  double q3 = 0.0;
};

FDerivs f_derivs(double x, double y, const Theta& theta, const CoeffTable& ct);

/// Scale-free ratios at t: R0 = sum_i gamma_i e_i cosh_i / F, R1 = f / F.
struct FactorRatios {
  double R0 = 0.0;
  double R1 = 0.0;
};

FactorRatios factor_ratios(double t, const CoeffTable& ct);

/// Per-level ratios c_i = e^{-gamma_i|b|^2} cosh(2 beta_i t) / F(t) and the sinh analogue.
void level_ratios(double t, const CoeffTable& ct, std::span<double> c, std::span<double> s);

/// d log F(u) / d tau at fixed u divided through, for the compound-noise parameter.
/// kappa = A^2 sigma2 / C.
inline double tau_ratio(double t, double kappa, const CoeffTable& ct, const FactorRatios& r) {
  return kappa * ct.babs2 * r.R0 - 2.0 * kappa * t * r.R1;
}

struct PointEval {
  double x = 0.0;
  double y = 0.0;
  double u = 0.0;
  double v = 0.0;
  double logF_u = 0.0;
  double logF_v = 0.0;
};

/// x + jy = z_k - A a s1k; u = b_R x + b_I y, v = b_I x - b_R y.
PointEval uv_from_observation(cplx z_k, cplx s1k, const Theta& theta, const CoeffTable& ct);

enum class LikelihoodMethod { direct, factorized };

/// log D_k: brute-force sum over the constellation, or log 4 + log F(u) + log F(v).
double log_dk(cplx z_k, cplx s1k, const Theta& theta, const ScenarioParams& sc, LikelihoodMethod method);

/// Joint log-likelihood of pilot and data observations, constants included.
double log_likelihood(const Observation& obs, const Theta& theta, const ScenarioParams& sc, LikelihoodMethod method);

/// Analytic gradient of log_likelihood (factorized form) with respect to
/// [a_R, a_I, b_R, b_I, tau].
std::array<double, 5> score(const Observation& obs, const Theta& theta, const ScenarioParams& sc);

}  // namespace relaycrb
