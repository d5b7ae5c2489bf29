#pragma once

#include <complex>
#include <vector>

namespace relaycrb {

using cplx = std::complex<double>;

/**
 * Square QAM constellation of order M = 2^(2p).
 *
 * Points are {±d_p(2i-1) ± j d_p(2l-1)}, i,l = 1..2^(p-1), scaled so the
 * average symbol power equals P2 = (M-1) d^2 / 6. Enumeration order is
 * i (outer), then l, then sign quadrant (+,+), (-,+), (+,-), (-,-), so brute
 * force sums over the points are reproducible.
 */
class ConstellationSpec {
 public:
  /// Half-log-order p (M = 4^p).
  int p() const { return p_; }
  int order() const { return order_; }
  /// Intersymbol distance d.
  double d() const { return d_; }
  /// Half distance d/2.
  double d_p() const { return d_p_; }
  double power() const { return power_; }
  /// Number of first-quadrant levels per axis, 2^(p-1).
  int levels_per_axis() const { return static_cast<int>(q1_levels_.size()); }
  const std::vector<cplx>& points() const { return points_; }
  /// Ascending odd multiples of d_p: {(2i-1) d_p}.
  const std::vector<double>& q1_levels() const { return q1_levels_; }

 private:
  friend ConstellationSpec build_constellation(int p, double P2);
  ConstellationSpec() = default;

  int p_ = 0;
  int order_ = 0;
  double d_ = 0.0;
  double d_p_ = 0.0;
  double power_ = 0.0;
  std::vector<cplx> points_;
  std::vector<double> q1_levels_;
};

/// Throws DomainError for p < 1, p > 8 or a non-finite / non-positive power.
ConstellationSpec build_constellation(int p, double P2);

std::vector<double> quadrant_levels(const ConstellationSpec& spec);

/// Maps a square-QAM order M in {4, 16, 64, ...} to p; throws DomainError otherwise.
int half_log_order(int M);

}  // namespace relaycrb
