#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "relaycrb/constellation.hpp"
#include "relaycrb/errors.hpp"

using namespace relaycrb;

namespace {

double mean_power(const ConstellationSpec& s) {
  double acc = 0.0;
  for (const cplx& p : s.points()) acc += std::norm(p);
  return acc / static_cast<double>(s.points().size());
}

std::multiset<std::pair<double, double>> as_set(const std::vector<cplx>& pts) {
  std::multiset<std::pair<double, double>> out;
  for (const cplx& p : pts) out.insert({p.real(), p.imag()});
  return out;
}

}  // namespace

TEST_SUITE("constellation") {
  TEST_CASE("4-QAM at unit power") {
    const auto s = build_constellation(1, 1.0);
    CHECK(s.order() == 4);
    CHECK(s.d_p() == doctest::Approx(std::sqrt(2.0) / 2.0).epsilon(1e-14));
    REQUIRE(s.points().size() == 4);
    for (const cplx& p : s.points()) {
      CHECK(std::abs(p.real()) == doctest::Approx(0.7071068).epsilon(1e-7));
      CHECK(std::abs(p.imag()) == doctest::Approx(0.7071068).epsilon(1e-7));
    }
  }

  TEST_CASE("16-QAM levels") {
    const auto s = build_constellation(2, 1.0);
    CHECK(s.order() == 16);
    CHECK(s.d_p() == doctest::Approx(0.3162278).epsilon(1e-7));
    REQUIRE(s.q1_levels().size() == 2);
    CHECK(s.q1_levels()[0] == doctest::Approx(0.3162278).epsilon(1e-7));
    CHECK(s.q1_levels()[1] == doctest::Approx(0.9486833).epsilon(1e-7));
  }

  TEST_CASE("64-QAM empirical power by direct summation") {
    const auto s = build_constellation(3, 2.0);
    CHECK(s.order() == 64);
    CHECK(std::abs(mean_power(s) - 2.0) <= 1e-12 * 2.0);
  }

  TEST_CASE("quadrant levels are odd multiples of d_p") {
    // d_p = 0.5 at M = 4 and 16, d_p = 0.25 at M = 64, via P2 = (M - 1) (2 d_p)^2 / 6.
    auto lv = quadrant_levels(build_constellation(1, 3.0 * 1.0 / 6.0));
    REQUIRE(lv.size() == 1);
    CHECK(lv[0] == doctest::Approx(0.5).epsilon(1e-14));
    lv = quadrant_levels(build_constellation(2, 15.0 * 1.0 / 6.0));
    REQUIRE(lv.size() == 2);
    CHECK(lv[0] == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(lv[1] == doctest::Approx(1.5).epsilon(1e-14));
    lv = quadrant_levels(build_constellation(3, 63.0 * 0.25 / 6.0));
    REQUIRE(lv.size() == 4);
    const double expect[] = {0.25, 0.75, 1.25, 1.75};
    for (int i = 0; i < 4; ++i) CHECK(lv[i] == doctest::Approx(expect[i]).epsilon(1e-14));
  }

  TEST_CASE("invalid arguments") {
    CHECK_THROWS_AS(build_constellation(0, 1.0), DomainError);
    CHECK_THROWS_AS(build_constellation(-1, 1.0), DomainError);
    CHECK_THROWS_AS(build_constellation(1, 0.0), DomainError);
    CHECK_THROWS_AS(build_constellation(1, -2.0), DomainError);
    CHECK_THROWS_AS(build_constellation(1, NAN), DomainError);
    CHECK_THROWS_AS(build_constellation(1, INFINITY), DomainError);
    CHECK_THROWS_AS(half_log_order(8), DomainError);
    CHECK_THROWS_AS(half_log_order(2), DomainError);
    CHECK(half_log_order(256) == 4);
  }

  TEST_CASE("structural invariants for p = 1..4") {
    for (int p = 1; p <= 4; ++p) {
      for (double P2 : {0.3, 1.0, 7.5}) {
        CAPTURE(p);
        CAPTURE(P2);
        const auto s = build_constellation(p, P2);
        const int M = 1 << (2 * p);
        CHECK(s.order() == M);
        CHECK(static_cast<int>(s.points().size()) == M);
        CHECK(s.power() == doctest::Approx((M - 1) * s.d() * s.d() / 6.0).epsilon(1e-15));
        CHECK(std::abs(mean_power(s) - P2) <= 1e-12 * P2);
        CHECK(s.d_p() == s.d() / 2.0);

        cplx mean = 0.0;
        for (const cplx& q : s.points()) mean += q;
        CHECK(std::abs(mean) <= 1e-12);

        const auto base = as_set(s.points());
        std::vector<cplx> neg, conj;
        for (const cplx& q : s.points()) {
          neg.push_back(-q);
          conj.push_back(std::conj(q));
        }
        CHECK(as_set(neg) == base);
        CHECK(as_set(conj) == base);

        std::vector<cplx> rebuilt;
        for (double r : quadrant_levels(s)) {
          for (double q : quadrant_levels(s)) {
            for (cplx sign : {cplx(1, 1), cplx(-1, 1), cplx(1, -1), cplx(-1, -1)}) {
              rebuilt.emplace_back(sign.real() * r, sign.imag() * q);
            }
          }
        }
        CHECK(as_set(rebuilt) == base);
        CHECK(std::is_sorted(s.q1_levels().begin(), s.q1_levels().end()));
      }
    }
  }
}
