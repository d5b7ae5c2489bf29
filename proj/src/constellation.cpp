#include "relaycrb/constellation.hpp"

#include <cmath>
#include <string>

#include "relaycrb/errors.hpp"

namespace relaycrb {

ConstellationSpec build_constellation(int p, double P2) {
  if (p < 1 || p > 8) {
    throw DomainError("build_constellation: p must be in [1, 8], got " + std::to_string(p));
  }
  if (!std::isfinite(P2) || P2 <= 0.0) {
    throw DomainError("build_constellation: power must be finite and positive");
  }
  ConstellationSpec spec;
  spec.p_ = p;
  spec.order_ = 1 << (2 * p);
  spec.power_ = P2;
  spec.d_ = std::sqrt(6.0 * P2 / static_cast<double>(spec.order_ - 1));
  spec.d_p_ = spec.d_ / 2.0;

  const int levels = 1 << (p - 1);
  spec.q1_levels_.reserve(levels);
  for (int i = 1; i <= levels; ++i) {
    spec.q1_levels_.push_back(static_cast<double>(2 * i - 1) * spec.d_p_);
  }

  spec.points_.reserve(spec.order_);
  for (double re : spec.q1_levels_) {
    for (double im : spec.q1_levels_) {
      spec.points_.emplace_back(re, im);
      spec.points_.emplace_back(-re, im);
      spec.points_.emplace_back(re, -im);
      spec.points_.emplace_back(-re, -im);
    }
  }
  return spec;
}

std::vector<double> quadrant_levels(const ConstellationSpec& spec) { return spec.q1_levels(); }

int half_log_order(int M) {
  for (int p = 1; p <= 8; ++p) {
    if (M == (1 << (2 * p))) return p;
  }
  throw DomainError("not a square QAM order: " + std::to_string(M));
}

}  // namespace relaycrb
