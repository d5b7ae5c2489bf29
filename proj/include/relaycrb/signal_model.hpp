#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "relaycrb/constellation.hpp"

namespace relaycrb {

using CVector = std::vector<cplx>;
using Rng = std::mt19937_64;

/// Independent generator for one worker / realization / sample batch.
Rng make_rng(std::uint64_t root_seed, std::uint64_t stream);

/// Flat-fading coefficients of the two-way relay links. g2 only matters at
/// terminal T2 and is carried along for completeness.
struct ChannelRealization {
  cplx h1;
  cplx h2;
  cplx g1;
  cplx g2;
};

/// Composite parameters seen at T1: a = h1 h2, b = g1 h2, tau = |h2|^2.
struct Theta {
  double a_R = 0.0;
  double a_I = 0.0;
  double b_R = 0.0;
  double b_I = 0.0;
  double tau = 0.0;

  cplx a() const { return {a_R, a_I}; }
  cplx b() const { return {b_R, b_I}; }
  double b_abs2() const { return b_R * b_R + b_I * b_I; }

  /// Ordering [a_R, a_I, b_R, b_I, tau], shared with FisherMatrix rows.
  std::array<double, 5> as_array() const { return {a_R, a_I, b_R, b_I, tau}; }
  static Theta from_array(const std::array<double, 5>& v) { return {v[0], v[1], v[2], v[3], v[4]}; }
  static Theta from_complex(cplx a, cplx b, double tau) { return {a.real(), a.imag(), b.real(), b.imag(), tau}; }
};

struct ScenarioParams {
  double A = 1.0;       // relay amplification factor
  double sigma2 = 1.0;  // per-hop noise variance
  double P1 = 1.0;
  double P2 = 1.0;
  ConstellationSpec spec2 = build_constellation(1, 1.0);  // T2 data constellation
  CVector t1;                                              // T1 pilots (length L)
  CVector t2;                                              // T2 pilots (length L)
  CVector s1;                                              // T1 data, known at T1 (length N)

  std::size_t L() const { return t1.size(); }
  std::size_t N() const { return s1.size(); }

  /// Checks lengths, positivity and pilot powers; throws DomainError.
  void validate() const;
};

struct Observation {
  CVector z_t;  // pilot phase
  CVector z;    // data phase
};

enum class NoiseSampling {
  compound,   // one CN(0, C) draw per sample
  two_stage,  // A h2 w + w1 with |h2| = sqrt(tau); statistically identical
};

Theta derive_theta(const ChannelRealization& ch);

/// C = sigma2 (A^2 tau + 1).
double effective_noise(const Theta& theta, double A, double sigma2);

/// Circular complex Gaussian CN(0, variance).
cplx sample_cn(Rng& rng, double variance = 1.0);

/// Pair of unit-variance CN variates with E[c1 c2*] = rho.
std::pair<cplx, cplx> sample_channel_pair(Rng& rng, double rho);

/// Draws h1,h2 correlated with rho and an independent g1,g2 pair with the same rho.
ChannelRealization sample_channels(Rng& rng, double rho);

/// Orthogonal QPSK pilot pair: t1 = sqrt(P1) c_k, t2 = sqrt(P2) c_k (-1)^k,
/// carrier c_k = e^{j pi/4} j^{floor(k/2)}. Requires L even and >= 2.
std::pair<CVector, CVector> make_pilots(std::size_t L, double P1, double P2);

CVector draw_symbols(Rng& rng, const ConstellationSpec& spec, std::size_t N);

/// z_t = A a t1 + A b t2 + e_t, z = A a s1 + A b s2 + e, e ~ CN(0, C).
Observation simulate_observation(Rng& rng, const Theta& theta, const ScenarioParams& sc, std::span<const cplx> s2,
                                 NoiseSampling mode = NoiseSampling::compound);

/// SNR = 10 log10(P2 / sigma2).
double snr_to_sigma2(double snr_db, double P2);

}  // namespace relaycrb
