#include "relaycrb/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "relaycrb/errors.hpp"

namespace relaycrb {

namespace {

constexpr std::size_t kMaxLevels = 128;

// Scaled level terms e^{-gamma_i|b|^2} cosh(2 beta_i t) and sinh(...), each
// multiplied by e^{-m}. Returns m.
double scaled_levels(double t, const CoeffTable& ct, double* cosh_out, double* sinh_out) {
  const std::size_t K = ct.levels();
  const double at = std::abs(t);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < K; ++i) {
    m = std::max(m, -ct.gamma[i] * ct.babs2 + 2.0 * ct.beta[i] * at);
  }
  const double sign = t < 0.0 ? -1.0 : 1.0;
  for (std::size_t i = 0; i < K; ++i) {
    const double base = std::exp(-ct.gamma[i] * ct.babs2 + 2.0 * ct.beta[i] * at - m);
    const double tail = -4.0 * ct.beta[i] * at;
    cosh_out[i] = 0.5 * base * (1.0 + std::exp(tail));
    if (sinh_out != nullptr) sinh_out[i] = -0.5 * sign * base * std::expm1(tail);
  }
  return m;
}

double log_sum_exp(std::span<const double> e) {
  const double m = *std::max_element(e.begin(), e.end());
  double acc = 0.0;
  for (double v : e) acc += std::exp(v - m);
  return m + std::log(acc);
}

}  // namespace

CoeffTable coeffs(const ConstellationSpec& spec, double A, double C, double babs2) {
  if (!(A > 0.0) || !(C > 0.0)) throw DomainError("coeffs: A and C must be positive");
  if (static_cast<std::size_t>(spec.levels_per_axis()) > kMaxLevels) throw DomainError("coeffs: too many levels");
  CoeffTable ct;
  ct.A = A;
  ct.C = C;
  ct.babs2 = babs2;
  for (double level : spec.q1_levels()) {
    ct.beta.push_back(A * level / C);
    ct.gamma.push_back(A * A * level * level / C);
  }
  return ct;
}

CoeffTable coeffs(const Theta& theta, const ScenarioParams& sc) {
  return coeffs(sc.spec2, sc.A, effective_noise(theta, sc.A, sc.sigma2), theta.b_abs2());
}

double log_f_theta(double t, const CoeffTable& ct) {
  double c[kMaxLevels];
  const double m = scaled_levels(t, ct, c, nullptr);
  double F = 0.0;
  for (std::size_t i = 0; i < ct.levels(); ++i) F += c[i];
  return m + std::log(F);
}

FDerivs f_derivs(double x, double y, const Theta& theta, const CoeffTable& ct) {
  double c[kMaxLevels];
  double s[kMaxLevels];
  const double u = theta.b_R * x + theta.b_I * y;
  FDerivs out;
  out.log_scale = scaled_levels(u, ct, c, s);
  double gc = 0.0;
  for (std::size_t i = 0; i < ct.levels(); ++i) {
    out.F += c[i];
    out.f += ct.beta[i] * s[i];
    gc += ct.gamma[i] * c[i];
  }
  const double A2 = ct.A * ct.A;
  const double kappa = A2 / (A2 * theta.tau + 1.0);  // A^2 sigma2 / C
  out.q1 = -2.0 * theta.b_R * gc + 2.0 * x * out.f;
  out.q2 = -2.0 * theta.b_I * gc + 2.0 * y * out.f;
  out.q3 = kappa * ct.babs2 * gc - 2.0 * kappa * u * out.f;
  return out;
}

FactorRatios factor_ratios(double t, const CoeffTable& ct) {
  double c[kMaxLevels];
  double s[kMaxLevels];
  scaled_levels(t, ct, c, s);
  double F = 0.0, gc = 0.0, bs = 0.0;
  for (std::size_t i = 0; i < ct.levels(); ++i) {
    F += c[i];
    gc += ct.gamma[i] * c[i];
    bs += ct.beta[i] * s[i];
  }
  return {gc / F, bs / F};
}

void level_ratios(double t, const CoeffTable& ct, std::span<double> c, std::span<double> s) {
  if (c.size() < ct.levels() || s.size() < ct.levels()) throw DomainError("level_ratios: output too small");
  scaled_levels(t, ct, c.data(), s.data());
  double F = 0.0;
  for (std::size_t i = 0; i < ct.levels(); ++i) F += c[i];
  for (std::size_t i = 0; i < ct.levels(); ++i) {
    c[i] /= F;
    s[i] /= F;
  }
}

PointEval uv_from_observation(cplx z_k, cplx s1k, const Theta& theta, const CoeffTable& ct) {
  const cplx w = z_k - ct.A * theta.a() * s1k;
  PointEval p;
  p.x = w.real();
  p.y = w.imag();
  p.u = theta.b_R * p.x + theta.b_I * p.y;
  p.v = theta.b_I * p.x - theta.b_R * p.y;
  p.logF_u = log_f_theta(p.u, ct);
  p.logF_v = log_f_theta(p.v, ct);
  return p;
}

double log_dk(cplx z_k, cplx s1k, const Theta& theta, const ScenarioParams& sc, LikelihoodMethod method) {
  const double A = sc.A;
  const double C = effective_noise(theta, A, sc.sigma2);
  const cplx w = z_k - A * theta.a() * s1k;
  if (method == LikelihoodMethod::direct) {
    const auto& pts = sc.spec2.points();
    std::vector<double> e(pts.size());
    const double b2 = theta.b_abs2();
    for (std::size_t j = 0; j < pts.size(); ++j) {
      e[j] = -A * A * b2 * std::norm(pts[j]) / C + (2.0 * A / C) * (std::conj(w) * theta.b() * pts[j]).real();
    }
    return log_sum_exp(e);
  }
  const CoeffTable ct = coeffs(sc.spec2, A, C, theta.b_abs2());
  const PointEval p = uv_from_observation(z_k, s1k, theta, ct);
  return std::log(4.0) + p.logF_u + p.logF_v;
}

double log_likelihood(const Observation& obs, const Theta& theta, const ScenarioParams& sc, LikelihoodMethod method) {
  if (obs.z_t.size() != sc.L() || obs.z.size() != sc.N()) throw DomainError("log_likelihood: observation length mismatch");
  const double A = sc.A;
  const double C = effective_noise(theta, A, sc.sigma2);
  const std::size_t L = sc.L();
  const std::size_t N = sc.N();
  const cplx Aa = A * theta.a();
  const cplx Ab = A * theta.b();

  double pilot_q = 0.0;
  for (std::size_t k = 0; k < L; ++k) pilot_q += std::norm(obs.z_t[k] - Aa * sc.t1[k] - Ab * sc.t2[k]);
  double ll = -static_cast<double>(N + L) * std::log(std::numbers::pi * C) - pilot_q / C;
  if (N == 0) return ll;

  const double M = static_cast<double>(sc.spec2.order());
  if (method == LikelihoodMethod::direct) {
    const auto& pts = sc.spec2.points();
    std::vector<double> e(pts.size());
    ll -= static_cast<double>(N) * std::log(M);
    for (std::size_t k = 0; k < N; ++k) {
      const cplx w = obs.z[k] - Aa * sc.s1[k];
      for (std::size_t j = 0; j < pts.size(); ++j) e[j] = -std::norm(w - Ab * pts[j]) / C;
      ll += log_sum_exp(e);
    }
    return ll;
  }

  const CoeffTable ct = coeffs(sc.spec2, A, C, theta.b_abs2());
  ll += static_cast<double>(N) * std::log(4.0 / M);
  for (std::size_t k = 0; k < N; ++k) {
    const PointEval p = uv_from_observation(obs.z[k], sc.s1[k], theta, ct);
    ll += -(p.x * p.x + p.y * p.y) / C + p.logF_u + p.logF_v;
  }
  return ll;
}

std::array<double, 5> score(const Observation& obs, const Theta& theta, const ScenarioParams& sc) {
  if (obs.z_t.size() != sc.L() || obs.z.size() != sc.N()) throw DomainError("score: observation length mismatch");
  const double A = sc.A;
  const double C = effective_noise(theta, A, sc.sigma2);
  const double dC = A * A * sc.sigma2;  // dC / dtau
  const double kappa = dC / C;
  const cplx Aa = A * theta.a();
  const cplx Ab = A * theta.b();
  const cplx j{0.0, 1.0};
  std::array<double, 5> g{};

  // Pilot block: -(1/C) |r|^2 with r = z_t - A a t1 - A b t2.
  double q = 0.0;
  for (std::size_t k = 0; k < sc.L(); ++k) {
    const cplx r = obs.z_t[k] - Aa * sc.t1[k] - Ab * sc.t2[k];
    const cplx rc = std::conj(r);
    q += std::norm(r);
    g[0] += 2.0 * A / C * (rc * sc.t1[k]).real();
    g[1] += 2.0 * A / C * (rc * j * sc.t1[k]).real();
    g[2] += 2.0 * A / C * (rc * sc.t2[k]).real();
    g[3] += 2.0 * A / C * (rc * j * sc.t2[k]).real();
  }

  const double n_total = static_cast<double>(sc.L() + sc.N());
  if (sc.N() == 0) {
    g[4] = -n_total * dC / C + q * dC / (C * C);
    return g;
  }

  const CoeffTable ct = coeffs(sc.spec2, A, C, theta.b_abs2());
  for (std::size_t k = 0; k < sc.N(); ++k) {
    const cplx s1 = sc.s1[k];
    const cplx w = obs.z[k] - Aa * s1;
    const double x = w.real();
    const double y = w.imag();
    const double u = theta.b_R * x + theta.b_I * y;
    const double v = theta.b_I * x - theta.b_R * y;
    q += x * x + y * y;

    // -|w|^2 / C
    g[0] += 2.0 * A / C * (std::conj(w) * s1).real();
    g[1] += 2.0 * A / C * (std::conj(w) * j * s1).real();

    const FactorRatios ru = factor_ratios(u, ct);
    const FactorRatios rv = factor_ratios(v, ct);
    const cplx sb = std::conj(s1) * theta.b();
    // du/da_R = -A Re{s1* b}, du/da_I = -A Im{s1* b}; dv/da_R = -A Im{s1* b}, dv/da_I = A Re{s1* b}.
    g[0] += 2.0 * ru.R1 * (-A * sb.real()) + 2.0 * rv.R1 * (-A * sb.imag());
    g[1] += 2.0 * ru.R1 * (-A * sb.imag()) + 2.0 * rv.R1 * (A * sb.real());
    // du/db_R = x, du/db_I = y; dv/db_R = -y, dv/db_I = x.
    g[2] += -2.0 * theta.b_R * ru.R0 + 2.0 * x * ru.R1 - 2.0 * theta.b_R * rv.R0 - 2.0 * y * rv.R1;
    g[3] += -2.0 * theta.b_I * ru.R0 + 2.0 * y * ru.R1 - 2.0 * theta.b_I * rv.R0 + 2.0 * x * rv.R1;
    g[4] += tau_ratio(u, kappa, ct, ru) + tau_ratio(v, kappa, ct, rv);
  }
  g[4] += -n_total * dC / C + q * dC / (C * C);
  return g;
}

}  // namespace relaycrb
