#include <doctest.h>

#include <cmath>
#include <map>

#include "relaycrb/errors.hpp"
#include "relaycrb/signal_model.hpp"

using namespace relaycrb;

namespace {

void check_c(cplx got, cplx want, double tol = 1e-14) {
  CHECK(std::abs(got - want) <= tol);
}

ScenarioParams small_scenario(std::size_t L, std::size_t N, double A, double sigma2, Rng& rng) {
  ScenarioParams sc;
  sc.A = A;
  sc.sigma2 = sigma2;
  sc.spec2 = build_constellation(1, 1.0);
  if (L > 0) {
    auto [t1, t2] = make_pilots(L, 1.0, 1.0);
    sc.t1 = t1;
    sc.t2 = t2;
  }
  sc.s1 = draw_symbols(rng, build_constellation(1, 1.0), N);
  return sc;
}

}  // namespace

TEST_SUITE("signal_model") {
  TEST_CASE("derive_theta") {
    Theta t = derive_theta({1.0, 1.0, 1.0, 0.0});
    check_c(t.a(), 1.0);
    check_c(t.b(), 1.0);
    CHECK(t.tau == 1.0);

    t = derive_theta({cplx(0, 1), cplx(0, 1), 1.0, 0.0});
    check_c(t.a(), -1.0);
    check_c(t.b(), cplx(0, 1));
    CHECK(t.tau == doctest::Approx(1.0));

    t = derive_theta({cplx(0.3, 0.4), 2.0, -1.0, 0.0});
    check_c(t.a(), cplx(0.6, 0.8));
    check_c(t.b(), -2.0);
    CHECK(t.tau == doctest::Approx(4.0));
  }

  TEST_CASE("effective_noise") {
    CHECK(effective_noise(Theta{0, 0, 0, 0, 0.0}, 1.0, 1.0) == 1.0);
    CHECK(effective_noise(Theta{0, 0, 0, 0, 1.0}, 1.0, 1.0) == 2.0);
    CHECK(effective_noise(Theta{0, 0, 0, 0, 4.0}, 2.0, 0.5) == doctest::Approx(8.5));
    CHECK_THROWS_AS(effective_noise(Theta{0, 0, 0, 0, 1.0}, 1.0, 0.0), DomainError);
    CHECK_THROWS_AS(effective_noise(Theta{0, 0, 0, 0, 1.0}, 1.0, -1.0), DomainError);
    // Strictly increasing in tau and sigma2.
    double prev = 0.0;
    for (double tau = 0.0; tau < 5.0; tau += 0.25) {
      const double c = effective_noise(Theta{0, 0, 0, 0, tau}, 1.3, 0.7);
      CHECK(c > prev);
      prev = c;
    }
    prev = 0.0;
    for (double s2 = 0.01; s2 < 5.0; s2 *= 1.7) {
      const double c = effective_noise(Theta{0, 0, 0, 0, 2.0}, 1.3, s2);
      CHECK(c > prev);
      prev = c;
    }
  }

  TEST_CASE("sample_channel_pair second-order statistics") {
    for (double rho : {0.0, 0.3, 0.99}) {
      CAPTURE(rho);
      Rng rng = make_rng(11, static_cast<std::uint64_t>(rho * 100));
      const int n = 1000000;
      cplx corr = 0.0;
      double v1 = 0.0, v2 = 0.0;
      for (int i = 0; i < n; ++i) {
        const auto [c1, c2] = sample_channel_pair(rng, rho);
        corr += c1 * std::conj(c2);
        v1 += std::norm(c1);
        v2 += std::norm(c2);
      }
      corr /= n;
      CHECK(std::abs(corr.real() - rho) <= 0.005);
      CHECK(std::abs(corr.imag()) <= 0.005);
      CHECK(std::abs(v1 / n - 1.0) <= 0.01);
      CHECK(std::abs(v2 / n - 1.0) <= 0.01);
    }
    Rng rng = make_rng(1, 0);
    CHECK_THROWS_AS(sample_channel_pair(rng, 1.0), DomainError);
    CHECK_THROWS_AS(sample_channel_pair(rng, -0.1), DomainError);
  }

  TEST_CASE("make_pilots") {
    auto [t1, t2] = make_pilots(2, 1.0, 1.0);
    const cplx q = cplx(1, 1) / std::sqrt(2.0);
    REQUIRE(t1.size() == 2);
    check_c(t1[0], q);
    check_c(t1[1], q);
    check_c(t2[0], q);
    check_c(t2[1], -q);

    for (std::size_t L : {2u, 4u, 8u, 16u, 64u}) {
      for (auto [P1, P2] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}, std::pair{0.3, 5.0}}) {
        auto [a, b] = make_pilots(L, P1, P2);
        cplx e1 = 0.0, e2 = 0.0, x = 0.0;
        for (std::size_t k = 0; k < L; ++k) {
          e1 += std::conj(a[k]) * a[k];
          e2 += std::conj(b[k]) * b[k];
          x += std::conj(a[k]) * b[k];
          // QPSK-valued entries.
          CHECK(std::abs(std::abs(a[k].real()) - std::abs(a[k].imag())) <= 1e-14);
        }
        CHECK(e1.real() == doctest::Approx(static_cast<double>(L) * P1).epsilon(1e-14));
        CHECK(e2.real() == doctest::Approx(static_cast<double>(L) * P2).epsilon(1e-14));
        CHECK(std::abs(x) <= 1e-14 * static_cast<double>(L));
      }
    }
    CHECK_THROWS_AS(make_pilots(3, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(make_pilots(0, 1.0, 1.0), DomainError);
  }

  TEST_CASE("draw_symbols") {
    Rng rng = make_rng(5, 0);
    CHECK(draw_symbols(rng, build_constellation(1, 1.0), 0).empty());

    const auto s4 = build_constellation(1, 1.0);
    const auto v = draw_symbols(rng, s4, 1000000);
    std::map<std::pair<double, double>, int> counts;
    for (const cplx& s : v) ++counts[{s.real(), s.imag()}];
    CHECK(counts.size() == 4);
    for (const auto& [k, c] : counts) CHECK(std::abs(c / 1e6 - 0.25) <= 0.002);

    const auto s16 = build_constellation(2, 1.0);
    double p = 0.0;
    for (const cplx& s : draw_symbols(rng, s16, 1000000)) p += std::norm(s);
    CHECK(std::abs(p / 1e6 - 1.0) <= 0.005);
  }

  TEST_CASE("simulate_observation noise-free limit") {
    ScenarioParams sc;
    sc.A = 1.0;
    sc.sigma2 = 1e-12;
    sc.t1 = {1.0};
    sc.t2 = {1.0};
    Rng rng = make_rng(1, 0);
    const Observation obs = simulate_observation(rng, Theta{1, 0, 1, 0, 1}, sc, {});
    REQUIRE(obs.z_t.size() == 1);
    CHECK(obs.z.empty());
    CHECK(std::abs(obs.z_t[0] - 2.0) <= 1e-5);
  }

  TEST_CASE("simulate_observation noise variance") {
    Rng rng = make_rng(2, 0);
    {
      ScenarioParams sc = small_scenario(0, 1, 1.0, 1.0, rng);
      double acc = 0.0;
      const int n = 100000;
      for (int i = 0; i < n; ++i) {
        const CVector s2 = draw_symbols(rng, sc.spec2, 1);
        acc += std::norm(simulate_observation(rng, Theta{0, 0, 0, 0, 0}, sc, s2).z[0]);
      }
      CHECK(std::abs(acc / n - 1.0) <= 0.02);
    }
    for (NoiseSampling mode : {NoiseSampling::compound, NoiseSampling::two_stage}) {
      ScenarioParams sc = small_scenario(0, 1, 2.0, 0.5, rng);
      const Theta th = Theta::from_complex(1.0, cplx(0, 1), 1.0);
      double acc = 0.0;
      const int n = 100000;
      for (int i = 0; i < n; ++i) {
        const CVector s2 = draw_symbols(rng, sc.spec2, 1);
        const cplx z = simulate_observation(rng, th, sc, s2, mode).z[0];
        acc += std::norm(z - 2.0 * th.a() * sc.s1[0] - 2.0 * th.b() * s2[0]);
      }
      CHECK(std::abs(acc / n - 2.5) <= 0.02 * 2.5);
    }
  }

  TEST_CASE("simulate_observation is reproducible and checks lengths") {
    Rng setup = make_rng(3, 0);
    const ScenarioParams sc = small_scenario(4, 6, 1.0, 0.1, setup);
    const Theta th = Theta::from_complex({0.6, 0.8}, {1.2, -0.5}, 1.0);
    Rng r1 = make_rng(9, 4), r2 = make_rng(9, 4);
    const CVector s2a = draw_symbols(r1, sc.spec2, 6);
    const CVector s2b = draw_symbols(r2, sc.spec2, 6);
    const Observation a = simulate_observation(r1, th, sc, s2a);
    const Observation b = simulate_observation(r2, th, sc, s2b);
    CHECK(a.z == b.z);
    CHECK(a.z_t == b.z_t);
    Rng r3 = make_rng(9, 4);
    CHECK_THROWS_AS(simulate_observation(r3, th, sc, CVector(5)), DomainError);
  }

  TEST_CASE("snr_to_sigma2") {
    CHECK(snr_to_sigma2(0.0, 1.0) == 1.0);
    CHECK(snr_to_sigma2(10.0, 1.0) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(snr_to_sigma2(20.0, 2.0) == doctest::Approx(0.02).epsilon(1e-15));
  }

  TEST_CASE("scenario validation") {
    Rng rng = make_rng(4, 0);
    ScenarioParams sc = small_scenario(4, 2, 1.0, 1.0, rng);
    CHECK_NOTHROW(sc.validate());
    ScenarioParams bad = sc;
    bad.t2.pop_back();
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = sc;
    bad.sigma2 = 0.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = sc;
    bad.t1[0] *= 2.0;
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = sc;
    bad.t1.clear();
    bad.t2.clear();
    bad.s1.clear();
    CHECK_THROWS_AS(bad.validate(), DomainError);
    bad = sc;
    bad.P2 = 2.0;  // constellation still built for unit power
    CHECK_THROWS_AS(bad.validate(), DomainError);
  }
}
