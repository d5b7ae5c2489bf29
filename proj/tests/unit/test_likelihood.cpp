#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "relaycrb/likelihood.hpp"

using namespace relaycrb;

namespace {

ScenarioParams scenario(int p, std::size_t L, std::size_t N, double A, double sigma2, Rng& rng) {
  ScenarioParams sc;
  sc.A = A;
  sc.sigma2 = sigma2;
  sc.spec2 = build_constellation(p, 1.0);
  if (L > 0) {
    auto [t1, t2] = make_pilots(L, 1.0, 1.0);
    sc.t1 = t1;
    sc.t2 = t2;
  }
  sc.s1 = draw_symbols(rng, build_constellation(1, 1.0), N);
  return sc;
}

// log F as a function of (b_R, b_I, tau) at fixed (x, y), for finite differences.
double log_F_at(const ConstellationSpec& spec, double A, double sigma2, double bR, double bI, double tau, double x,
                double y) {
  const double C = sigma2 * (A * A * tau + 1.0);
  return log_f_theta(bR * x + bI * y, coeffs(spec, A, C, bR * bR + bI * bI));
}

}  // namespace

TEST_SUITE("likelihood") {
  TEST_CASE("coefficient tables") {
    auto ct = coeffs(build_constellation(1, 1.0), 1.0, 1.0, 1.0);
    REQUIRE(ct.levels() == 1);
    CHECK(ct.beta[0] == doctest::Approx(0.7071068).epsilon(1e-7));
    CHECK(ct.gamma[0] == doctest::Approx(0.5).epsilon(1e-14));

    ct = coeffs(build_constellation(2, 1.0), 1.0, 2.0, 1.0);
    REQUIRE(ct.levels() == 2);
    CHECK(ct.beta[0] == doctest::Approx(0.1581139).epsilon(1e-6));
    CHECK(ct.beta[1] == doctest::Approx(0.4743416).epsilon(1e-6));
    CHECK(ct.gamma[0] == doctest::Approx(0.05).epsilon(1e-13));
    CHECK(ct.gamma[1] == doctest::Approx(0.45).epsilon(1e-13));

    for (int p = 1; p <= 4; ++p) {
      const auto spec = build_constellation(p, 1.7);
      for (double A : {0.5, 2.0}) {
        for (double C : {0.01, 3.0}) {
          const auto t = coeffs(spec, A, C, 0.4);
          for (std::size_t i = 0; i < t.levels(); ++i) {
            const double lv = A * spec.d_p() * (2.0 * i + 1.0);
            CHECK(t.beta[i] * C == doctest::Approx(lv).epsilon(1e-14));
            CHECK(t.gamma[i] * C == doctest::Approx(lv * lv).epsilon(1e-14));
          }
        }
      }
    }
  }

  TEST_CASE("log_f_theta values") {
    const auto ct = coeffs(build_constellation(1, 1.0), 1.0, 1.0, 1.0);
    CHECK(log_f_theta(0.0, ct) == doctest::Approx(-0.5).epsilon(1e-15));
    CHECK(log_f_theta(500.0, ct) == doctest::Approx(705.913634006).epsilon(1e-10));
    CHECK(std::isfinite(log_f_theta(1e6, ct)));
    CHECK(std::isfinite(log_f_theta(-1e6, ct)));
  }

  TEST_CASE("log_f_theta matches extended-precision summation at M = 16") {
    const auto spec = build_constellation(2, 1.0);
    const auto ct = coeffs(spec, 1.0, 0.3, 0.8);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> ut(-50.0, 50.0);
    for (int k = 0; k < 1000; ++k) {
      const double t = ut(rng);
      long double F = 0.0L;
      for (std::size_t i = 0; i < ct.levels(); ++i) {
        F += std::exp(-static_cast<long double>(ct.gamma[i]) * 0.8L) *
             std::cosh(2.0L * static_cast<long double>(ct.beta[i]) * t);
      }
      const double ref = static_cast<double>(std::log(F));
      CHECK(std::abs(log_f_theta(t, ct) - ref) <= 1e-13 * std::max(1.0, std::abs(ref)));
    }
  }

  TEST_CASE("F is even and bounded below") {
    for (int p = 1; p <= 4; ++p) {
      const auto spec = build_constellation(p, 1.0);
      const auto ct = coeffs(spec, 1.2, 0.05, 2.0);
      double gmax = 0.0;
      for (double g : ct.gamma) gmax = std::max(gmax, g);
      const double floor_log = std::log(static_cast<double>(ct.levels())) - gmax * 2.0;
      for (double t = -40.0; t <= 40.0; t += 0.37) {
        CHECK(log_f_theta(t, ct) == log_f_theta(-t, ct));
        CHECK(log_f_theta(t, ct) >= floor_log - 1e-12);
      }
    }
  }

  TEST_CASE("derivatives at the origin") {
    const auto spec = build_constellation(2, 1.0);
    const Theta th = Theta::from_complex(0.0, {0.7, -0.4}, 0.6);
    const double A = 1.1, sigma2 = 0.3;
    const double C = sigma2 * (A * A * th.tau + 1.0);
    const auto ct = coeffs(spec, A, C, th.b_abs2());
    const FDerivs d = f_derivs(0.0, 0.0, th, ct);
    const double s = std::exp(d.log_scale);
    double q1 = 0.0, q2 = 0.0, q3 = 0.0;
    for (std::size_t i = 0; i < ct.levels(); ++i) {
      const double e = std::exp(-ct.gamma[i] * th.b_abs2());
      q1 += -2.0 * ct.gamma[i] * th.b_R * e;
      q2 += -2.0 * ct.gamma[i] * th.b_I * e;
      q3 += A * A * sigma2 * ct.beta[i] * ct.beta[i] * th.b_abs2() * e;
    }
    CHECK(d.q1 * s == doctest::Approx(q1).epsilon(1e-13));
    CHECK(d.q2 * s == doctest::Approx(q2).epsilon(1e-13));
    CHECK(d.q3 * s == doctest::Approx(q3).epsilon(1e-13));
    CHECK(d.f == 0.0);
  }

  TEST_CASE("derivatives match finite differences") {
    const double A = 1.0, sigma2 = 0.5;
    struct Case {
      int p;
      double bR, bI, tau, x, y;
    };
    for (const Case c : {Case{1, 1.0, 0.0, 1.0, 1.0, 0.0}, Case{1, 0.3, -0.8, 0.4, -0.7, 1.3},
                         Case{2, 1.2, -0.5, 1.0, 0.9, -0.2}, Case{3, -0.4, 0.6, 2.0, 2.5, 1.5}}) {
      const auto spec = build_constellation(c.p, 1.0);
      const Theta th{0.0, 0.0, c.bR, c.bI, c.tau};
      const auto ct = coeffs(spec, A, sigma2 * (A * A * c.tau + 1.0), th.b_abs2());
      const FDerivs d = f_derivs(c.x, c.y, th, ct);
      const double h = 1e-6;
      auto lf = [&](double bR, double bI, double tau) { return log_F_at(spec, A, sigma2, bR, bI, tau, c.x, c.y); };
      const double d1 = (lf(c.bR + h, c.bI, c.tau) - lf(c.bR - h, c.bI, c.tau)) / (2 * h);
      const double d2 = (lf(c.bR, c.bI + h, c.tau) - lf(c.bR, c.bI - h, c.tau)) / (2 * h);
      // q3 holds u fixed; u = b_R x + b_I y does not involve tau.
      const double d3 = (lf(c.bR, c.bI, c.tau + h) - lf(c.bR, c.bI, c.tau - h)) / (2 * h);
      CHECK(d.q1 / d.F == doctest::Approx(d1).epsilon(1e-6));
      CHECK(d.q2 / d.F == doctest::Approx(d2).epsilon(1e-6));
      CHECK(d.q3 / d.F == doctest::Approx(d3).epsilon(1e-6));
      // f is half the t-derivative of F.
      const double u = c.bR * c.x + c.bI * c.y;
      const double dt = (log_f_theta(u + h, ct) - log_f_theta(u - h, ct)) / (2 * h);
      CHECK(2.0 * d.f / d.F == doctest::Approx(dt).epsilon(1e-6));
      const FactorRatios r = factor_ratios(u, ct);
      CHECK(r.R1 == doctest::Approx(d.f / d.F).epsilon(1e-14));
    }
  }

  TEST_CASE("ratios stay finite far out") {
    const auto spec = build_constellation(4, 1.0);
    const Theta th = Theta::from_complex(0.0, {1.5, 0.9}, 0.5);
    const auto ct = coeffs(spec, 1.0, 1e-3, th.b_abs2());
    for (double x : {-1e3, -10.0, 0.0, 37.0, 1e3}) {
      for (double y : {-1e3, 0.5, 1e3}) {
        const FDerivs d = f_derivs(x, y, th, ct);
        CHECK(std::isfinite(d.q1 / d.F));
        CHECK(std::isfinite(d.q2 / d.F));
        CHECK(std::isfinite(d.q3 / d.F));
        CHECK(std::isfinite(d.f / d.F));
      }
    }
  }

  TEST_CASE("uv_from_observation") {
    const auto ct = coeffs(build_constellation(1, 1.0), 1.0, 1.0, 1.0);
    const cplx s1k(0.7, -0.7);
    Theta th = Theta::from_complex({0.6, 0.8}, 1.0, 0.0);
    PointEval pe = uv_from_observation(th.a() * s1k, s1k, th, ct);
    CHECK(std::abs(pe.x) + std::abs(pe.y) + std::abs(pe.u) + std::abs(pe.v) <= 1e-15);

    const cplx z = th.a() * s1k + cplx(0.3, -1.1);
    pe = uv_from_observation(z, s1k, th, ct);
    CHECK(pe.u == doctest::Approx(pe.x));
    CHECK(pe.v == doctest::Approx(-pe.y));
    CHECK(pe.logF_u == doctest::Approx(log_f_theta(pe.u, ct)));

    th = Theta::from_complex({0.6, 0.8}, cplx(0, 1), 0.0);
    pe = uv_from_observation(z, s1k, th, ct);
    CHECK(pe.u == doctest::Approx(pe.y));
    CHECK(pe.v == doctest::Approx(pe.x));
  }

  TEST_CASE("per-symbol factor: direct and factorized forms") {
    Rng rng = make_rng(8, 0);
    for (int p = 1; p <= 4; ++p) {
      ScenarioParams sc = scenario(p, 0, 1, 1.0, 1.0, rng);
      const double logM = std::log(static_cast<double>(sc.spec2.order()));
      const Theta b0 = Theta::from_complex({0.2, 0.1}, 0.0, 0.0);
      CHECK(log_dk({0.4, -2.0}, sc.s1[0], b0, sc, LikelihoodMethod::direct) == doctest::Approx(logM).epsilon(1e-14));
      CHECK(log_dk({0.4, -2.0}, sc.s1[0], b0, sc, LikelihoodMethod::factorized) ==
            doctest::Approx(logM).epsilon(1e-14));
    }
    ScenarioParams sc = scenario(1, 0, 1, 1.0, 1.0, rng);
    const Theta th = Theta::from_complex(1.0, 1.0, 0.0);
    const double d = log_dk({1.0, 1.0}, 1.0, th, sc, LikelihoodMethod::direct);
    const double f = log_dk({1.0, 1.0}, 1.0, th, sc, LikelihoodMethod::factorized);
    CHECK(std::abs(d - f) <= 1e-12 * std::abs(d));
    // Brute force over the four symbols, written out.
    double brute = 0.0;
    for (const cplx& s2 : sc.spec2.points()) {
      brute += std::exp(-std::norm(s2) + 2.0 * (std::conj(cplx(0.0, 1.0)) * s2).real());
    }
    CHECK(d == doctest::Approx(std::log(brute)).epsilon(1e-13));
  }

  TEST_CASE("log_likelihood reduces to the Gaussian pilot form at N = 0") {
    Rng rng = make_rng(9, 0);
    const ScenarioParams sc = scenario(2, 8, 0, 1.3, 0.4, rng);
    const Theta th = Theta::from_complex({0.6, 0.8}, {-0.3, 1.1}, 0.7);
    const Observation obs = simulate_observation(rng, th, sc, {});
    const double C = effective_noise(th, sc.A, sc.sigma2);
    double q = 0.0;
    for (std::size_t k = 0; k < sc.L(); ++k) {
      q += std::norm(obs.z_t[k] - sc.A * th.a() * sc.t1[k] - sc.A * th.b() * sc.t2[k]);
    }
    const double ref = -8.0 * std::log(std::numbers::pi * C) - q / C;
    for (auto m : {LikelihoodMethod::direct, LikelihoodMethod::factorized}) {
      CHECK(log_likelihood(obs, th, sc, m) == doctest::Approx(ref).epsilon(1e-14));
    }
  }

  TEST_CASE("direct and factorized log-likelihoods agree") {
    Rng rng = make_rng(10, 0);
    for (int p = 1; p <= 4; ++p) {
      for (int k = 0; k < 50; ++k) {
        const std::size_t L = k % 3 == 0 ? 0 : 4;
        const std::size_t N = 1 + static_cast<std::size_t>(k % 7);
        const ScenarioParams sc = scenario(p, L, N, 0.8 + 0.01 * k, 0.02 + 0.03 * k, rng);
        const Theta th = Theta::from_complex(sample_cn(rng), sample_cn(rng), 0.1 + 0.05 * k);
        const Observation obs = simulate_observation(rng, th, sc, draw_symbols(rng, sc.spec2, N));
        const double d = log_likelihood(obs, th, sc, LikelihoodMethod::direct);
        const double f = log_likelihood(obs, th, sc, LikelihoodMethod::factorized);
        CHECK(std::abs(d - f) <= 1e-9);
      }
    }
  }

  TEST_CASE("analytic score matches finite differences") {
    Rng rng = make_rng(12, 0);
    for (int p : {1, 2, 3}) {
      const ScenarioParams sc = scenario(p, 4, 6, 1.0, 0.2, rng);
      const Theta th = Theta::from_complex({0.6, 0.8}, {1.2, -0.5}, 1.0);
      const Observation obs = simulate_observation(rng, th, sc, draw_symbols(rng, sc.spec2, 6));
      const auto g = score(obs, th, sc);
      const auto base = th.as_array();
      for (int i = 0; i < 5; ++i) {
        const double h = 1e-6;
        auto up = base, dn = base;
        up[i] += h;
        dn[i] -= h;
        const double fd = (log_likelihood(obs, Theta::from_array(up), sc, LikelihoodMethod::factorized) -
                           log_likelihood(obs, Theta::from_array(dn), sc, LikelihoodMethod::factorized)) /
                          (2 * h);
        CAPTURE(p);
        CAPTURE(i);
        CHECK(std::abs(g[i] - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
      }
    }
  }

  TEST_CASE("joint density of (u, v) integrates to one") {
    // f(u, v) = 4 F(u) F(v) exp(-(u^2 + v^2) / (C |b|^2)) / (M pi C |b|^2).
    for (int p : {1, 2, 3}) {
      const auto spec = build_constellation(p, 1.0);
      const double C = 1.0, b2 = 1.0;
      const auto ct = coeffs(spec, 1.0, C, b2);
      const double half = 12.0 * std::sqrt(C * b2 / 2.0);
      const double h = 0.02;
      const int n = static_cast<int>(std::round(2.0 * half / h));
      std::vector<double> g(n + 1);
      for (int i = 0; i <= n; ++i) {
        const double t = -half + i * h;
        g[i] = std::exp(log_f_theta(t, ct) - t * t / (C * b2));
      }
      double acc = 0.0;
      for (int i = 0; i <= n; ++i) {
        for (int k = 0; k <= n; ++k) {
          const double w = (i == 0 || i == n ? 0.5 : 1.0) * (k == 0 || k == n ? 0.5 : 1.0);
          acc += w * g[i] * g[k];
        }
      }
      acc *= h * h * 4.0 / (spec.order() * std::numbers::pi * C * b2);
      CHECK(std::abs(acc - 1.0) <= 1e-6);
    }
  }

  TEST_CASE("u and v are empirically uncorrelated") {
    Rng rng = make_rng(13, 0);
    const ScenarioParams sc = scenario(2, 0, 1, 1.0, 0.3, rng);
    const Theta th = Theta::from_complex({0.6, 0.8}, {1.2, -0.5}, 1.0);
    const auto ct = coeffs(th, sc);
    const int n = 100000;
    double su = 0, sv = 0, suu = 0, svv = 0, suv = 0;
    for (int i = 0; i < n; ++i) {
      const Observation obs = simulate_observation(rng, th, sc, draw_symbols(rng, sc.spec2, 1));
      const PointEval pe = uv_from_observation(obs.z[0], sc.s1[0], th, ct);
      su += pe.u;
      sv += pe.v;
      suu += pe.u * pe.u;
      svv += pe.v * pe.v;
      suv += pe.u * pe.v;
    }
    const double cov = suv / n - su / n * sv / n;
    const double corr = cov / std::sqrt((suu / n - su * su / n / n) * (svv / n - sv * sv / n / n));
    CHECK(std::abs(corr) < 3.0 / std::sqrt(static_cast<double>(n)));
  }
}
