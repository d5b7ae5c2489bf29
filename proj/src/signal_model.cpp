#include "relaycrb/signal_model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "relaycrb/errors.hpp"

namespace relaycrb {

namespace {

double mean_power(std::span<const cplx> v) {
  double acc = 0.0;
  for (const auto& x : v) acc += std::norm(x);
  return acc / static_cast<double>(v.size());
}

}  // namespace

Rng make_rng(std::uint64_t root_seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(root_seed), static_cast<std::uint32_t>(root_seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32), 0x5eedu};
  return Rng(seq);
}

void ScenarioParams::validate() const {
  if (!(A > 0.0) || !std::isfinite(A)) throw DomainError("scenario: A must be positive");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2)) throw DomainError("scenario: sigma2 must be positive");
  if (!(P1 > 0.0) || !(P2 > 0.0)) throw DomainError("scenario: powers must be positive");
  if (t1.size() != t2.size()) throw DomainError("scenario: pilot vectors differ in length");
  if (L() + N() == 0) throw DomainError("scenario: L + N must be at least 1");
  if (std::abs(spec2.power() - P2) > 1e-9 * P2) throw DomainError("scenario: constellation power differs from P2");
  if (L() > 0) {
    if (std::abs(mean_power(t1) - P1) > 1e-9) throw DomainError("scenario: mean power of t1 differs from P1");
    if (std::abs(mean_power(t2) - P2) > 1e-9) throw DomainError("scenario: mean power of t2 differs from P2");
  }
  for (const auto& v : {std::span<const cplx>(t1), std::span<const cplx>(t2), std::span<const cplx>(s1)}) {
    for (const auto& x : v) {
      if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) throw DomainError("scenario: non-finite symbol");
    }
  }
}

Theta derive_theta(const ChannelRealization& ch) {
  return Theta::from_complex(ch.h1 * ch.h2, ch.g1 * ch.h2, std::norm(ch.h2));
}

double effective_noise(const Theta& theta, double A, double sigma2) {
  if (!(sigma2 > 0.0)) throw DomainError("effective_noise: sigma2 must be positive");
  if (!(A > 0.0)) throw DomainError("effective_noise: A must be positive");
  if (theta.tau < 0.0) throw DomainError("effective_noise: tau must be non-negative");
  return sigma2 * (A * A * theta.tau + 1.0);
}

cplx sample_cn(Rng& rng, double variance) {
  std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
  const double re = gauss(rng);
  const double im = gauss(rng);
  return {re, im};
}

std::pair<cplx, cplx> sample_channel_pair(Rng& rng, double rho) {
  if (!(rho >= 0.0 && rho < 1.0)) throw DomainError("sample_channel_pair: rho must lie in [0, 1)");
  const cplx c1 = sample_cn(rng);
  const cplx w = sample_cn(rng);
  return {c1, rho * c1 + std::sqrt(1.0 - rho * rho) * w};
}

ChannelRealization sample_channels(Rng& rng, double rho) {
  const auto [h1, h2] = sample_channel_pair(rng, rho);
  const auto [g1, g2] = sample_channel_pair(rng, rho);
  return {h1, h2, g1, g2};
}

std::pair<CVector, CVector> make_pilots(std::size_t L, double P1, double P2) {
  if (L < 2 || L % 2 != 0) {
    throw DomainError("make_pilots: orthogonal equal-modulus pilots need an even L >= 2, got " + std::to_string(L));
  }
  if (!(P1 > 0.0) || !(P2 > 0.0)) throw DomainError("make_pilots: powers must be positive");
  const cplx base = std::polar(1.0, std::numbers::pi / 4.0);
  const cplx quarter_turns[4] = {{1.0, 0.0}, {0.0, 1.0}, {-1.0, 0.0}, {0.0, -1.0}};
  CVector t1(L), t2(L);
  for (std::size_t k = 0; k < L; ++k) {
    const cplx carrier = base * quarter_turns[(k / 2) % 4];
    const double walsh = (k % 2 == 0) ? 1.0 : -1.0;
    t1[k] = std::sqrt(P1) * carrier;
    t2[k] = std::sqrt(P2) * walsh * carrier;
  }
  return {t1, t2};
}

CVector draw_symbols(Rng& rng, const ConstellationSpec& spec, std::size_t N) {
  std::uniform_int_distribution<std::size_t> pick(0, spec.points().size() - 1);
  CVector out(N);
  for (auto& s : out) s = spec.points()[pick(rng)];
  return out;
}

Observation simulate_observation(Rng& rng, const Theta& theta, const ScenarioParams& sc, std::span<const cplx> s2,
                                 NoiseSampling mode) {
  if (s2.size() != sc.N()) throw DomainError("simulate_observation: |s2| must equal N");
  if (sc.t1.size() != sc.t2.size()) throw DomainError("simulate_observation: pilot length mismatch");

  const double C = effective_noise(theta, sc.A, sc.sigma2);
  const double h2_mag = std::sqrt(theta.tau);
  auto noise = [&]() -> cplx {
    if (mode == NoiseSampling::compound) return sample_cn(rng, C);
    const cplx relay = sample_cn(rng, sc.sigma2);
    const cplx terminal = sample_cn(rng, sc.sigma2);
    return sc.A * h2_mag * relay + terminal;
  };

  const cplx Aa = sc.A * theta.a();
  const cplx Ab = sc.A * theta.b();
  Observation obs;
  obs.z_t.resize(sc.L());
  obs.z.resize(sc.N());
  for (std::size_t k = 0; k < sc.L(); ++k) obs.z_t[k] = Aa * sc.t1[k] + Ab * sc.t2[k] + noise();
  for (std::size_t k = 0; k < sc.N(); ++k) obs.z[k] = Aa * sc.s1[k] + Ab * s2[k] + noise();
  return obs;
}

double snr_to_sigma2(double snr_db, double P2) {
  if (!(P2 > 0.0)) throw DomainError("snr_to_sigma2: P2 must be positive");
  return P2 * std::pow(10.0, -snr_db / 10.0);
}

}  // namespace relaycrb
