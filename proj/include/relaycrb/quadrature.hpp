#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace relaycrb {

/// Gaussian quadrature rule: Hermite (weight exp(-x^2) on the real line,
/// weights sum to sqrt(pi)) or Legendre (unit weight on [-1, 1], weights sum to 2).
struct QuadRule {
  int n = 0;
  std::vector<double> nodes;    // ascending, symmetric about 0
  std::vector<double> weights;  // positive
};

/// n-point rule, 2 <= n <= 256, built once per n and cached. Exact for
/// polynomials of degree <= 2n - 1.
const QuadRule& hermite_rule(int n);

/// n-point Gauss-Legendre rule on [-1, 1], 2 <= n <= 256, cached.
const QuadRule& legendre_rule(int n);

/**
 * Expectation of g(t) under the density exp(-(t - center)^2 / s2) / sqrt(pi s2),
 * i.e. a normal law with mean `center` and variance s2 / 2:
 * (1 / sqrt(pi)) sum_i w_i g(center + sqrt(s2) x_i).
 * Throws NumericalError naming the node if g is not finite there.
 */
double expect_1d(const std::function<double(double)>& g, double s2, const QuadRule& rule, double center = 0.0);

/**
 * Same expectation as expect_1d, by composite n-point Gauss-Legendre panels over
 * center +- 7 sqrt(s2) (the omitted Gaussian mass is below 1e-21). Panels are at
 * most `half_width` wide on each side of their midpoint, so an integrand whose
 * complex singularities stay `half_width` away from the real axis converges
 * geometrically in n regardless of where they sit. At most 20000 panels.
 */
double expect_1d_panels(const std::function<double(double)>& g, double s2, int n, double half_width,
                        double center = 0.0);

/// Vector-valued form: g(t, out) writes out.size() == dim integrands; returns their expectations.
std::vector<double> expect_1d_panels(const std::function<void(double, std::span<double>)>& g, std::size_t dim,
                                     double s2, int n, double half_width, double center = 0.0);

/// Tensor-product analogue with weight exp(-((x-cx)^2 + (y-cy)^2) / s2) / (pi s2).
double expect_2d(const std::function<double(double, double)>& g, double s2, const QuadRule& rule, double cx = 0.0,
                 double cy = 0.0);

/**
 * Closed-form integral of t^order exp(-alpha t^2 - 2 delta t) over the real line:
 *   order 0: sqrt(pi/alpha) e^{delta^2/alpha}
 *   order 1: -sqrt(pi/alpha^3) delta e^{delta^2/alpha}
 *   order 2: (sqrt(pi/alpha^5) delta^2 + sqrt(pi/alpha^3) / 2) e^{delta^2/alpha}
 */
double gaussian_moment_integral(int order, double alpha, double delta);

}  // namespace relaycrb
