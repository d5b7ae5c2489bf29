#include "relaycrb/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <sstream>
#include <string>

#include "relaycrb/errors.hpp"

namespace relaycrb {

namespace {

// Orthonormal Hermite recurrence at x: returns p_n(x) and fills p_{n-1}(x) and
// sum_{k<n} p_k(x)^2 (the inverse Christoffel weight).
double orthonormal_hermite(int n, double x, double& prev, double& sumsq) {
  double p_km1 = 0.0;
  double p_k = std::pow(std::numbers::pi, -0.25);
  sumsq = 0.0;
  for (int k = 0; k < n; ++k) {
    sumsq += p_k * p_k;
    const double p_kp1 = x * std::sqrt(2.0 / (k + 1)) * p_k - std::sqrt(static_cast<double>(k) / (k + 1)) * p_km1;
    p_km1 = p_k;
    p_k = p_kp1;
  }
  prev = p_km1;
  return p_k;
}

QuadRule golub_welsch(int n) {
  // Jacobi matrix of the Hermite weight: zero diagonal, off-diagonal sqrt(k/2).
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);

  QuadRule rule;
  rule.n = n;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    // Newton polish on p_n, then Christoffel weights from the orthonormal sums.
    double x = solver.eigenvalues()[i];
    double prev = 0.0, sumsq = 0.0;
    for (int it = 0; it < 3; ++it) {
      const double pn = orthonormal_hermite(n, x, prev, sumsq);
      const double dpn = std::sqrt(2.0 * n) * prev;
      if (dpn == 0.0) break;
      x -= pn / dpn;
    }
    orthonormal_hermite(n, x, prev, sumsq);
    rule.nodes[i] = x;
    rule.weights[i] = 1.0 / sumsq;
  }
  // Enforce exact symmetry.
  for (int i = 0; i < n / 2; ++i) {
    const double x = 0.5 * (rule.nodes[n - 1 - i] - rule.nodes[i]);
    const double w = 0.5 * (rule.weights[n - 1 - i] + rule.weights[i]);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

QuadRule gauss_legendre(int n) {
  QuadRule rule;
  rule.n = n;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 1.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    double p0 = 1.0, p1 = x;
    for (int k = 2; k <= n; ++k) {
      const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  return rule;
}

[[noreturn]] void non_finite(const char* where, double x, double y, double value) {
  std::ostringstream os;
  os << where << ": integrand is " << value << " at node (" << x << ", " << y << ")";
  throw NumericalError(os.str());
}

}  // namespace

const QuadRule& hermite_rule(int n) {
  if (n < 2 || n > 256) throw DomainError("hermite_rule: n must be in [2, 256], got " + std::to_string(n));
  static std::mutex mu;
  static std::map<int, std::unique_ptr<QuadRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<QuadRule>(golub_welsch(n));
  return *slot;
}

const QuadRule& legendre_rule(int n) {
  if (n < 2 || n > 256) throw DomainError("legendre_rule: n must be in [2, 256], got " + std::to_string(n));
  static std::mutex mu;
  static std::map<int, std::unique_ptr<QuadRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<QuadRule>(gauss_legendre(n));
  return *slot;
}

std::vector<double> expect_1d_panels(const std::function<void(double, std::span<double>)>& g, std::size_t dim,
                                     double s2, int n, double half_width, double center) {
  if (!(s2 > 0.0)) throw DomainError("expect_1d_panels: s2 must be positive");
  if (!(half_width > 0.0)) throw DomainError("expect_1d_panels: half_width must be positive");
  constexpr double kSpan = 7.0;  // in units of sqrt(s2)
  constexpr int kMaxPanels = 20000;
  const QuadRule& rule = legendre_rule(n);
  const double s = std::sqrt(s2);
  const int panels = std::clamp(static_cast<int>(std::ceil(kSpan * s / half_width)), 1, kMaxPanels);
  const double h = kSpan / panels;  // panel half-width in standardized units
  std::vector<double> acc(dim, 0.0), part(dim), v(dim);
  for (int p = 0; p < panels; ++p) {
    for (int side : {-1, 1}) {
      const double mid = side * (2.0 * p + 1.0) * h;
      std::fill(part.begin(), part.end(), 0.0);
      for (int i = 0; i < n; ++i) {
        const double x = mid + h * rule.nodes[i];
        const double t = center + s * x;
        g(t, v);
        const double w = rule.weights[i] * std::exp(-x * x);
        for (std::size_t k = 0; k < dim; ++k) {
          if (!std::isfinite(v[k])) non_finite("expect_1d_panels", t, static_cast<double>(k), v[k]);
          part[k] += w * v[k];
        }
      }
      for (std::size_t k = 0; k < dim; ++k) acc[k] += h * part[k];
    }
  }
  for (double& a : acc) a /= std::sqrt(std::numbers::pi);
  return acc;
}

double expect_1d_panels(const std::function<double(double)>& g, double s2, int n, double half_width, double center) {
  return expect_1d_panels([&](double t, std::span<double> out) { out[0] = g(t); }, 1, s2, n, half_width, center)[0];
}

double expect_1d(const std::function<double(double)>& g, double s2, const QuadRule& rule, double center) {
  if (!(s2 > 0.0)) throw DomainError("expect_1d: s2 must be positive");
  const double s = std::sqrt(s2);
  double acc = 0.0;
  for (int i = 0; i < rule.n; ++i) {
    const double t = center + s * rule.nodes[i];
    const double v = g(t);
    if (!std::isfinite(v)) non_finite("expect_1d", t, 0.0, v);
    acc += rule.weights[i] * v;
  }
  return acc / std::sqrt(std::numbers::pi);
}

double expect_2d(const std::function<double(double, double)>& g, double s2, const QuadRule& rule, double cx,
                 double cy) {
  if (!(s2 > 0.0)) throw DomainError("expect_2d: s2 must be positive");
  const double s = std::sqrt(s2);
  double acc = 0.0;
  for (int i = 0; i < rule.n; ++i) {
    const double x = cx + s * rule.nodes[i];
    double row = 0.0;
    for (int k = 0; k < rule.n; ++k) {
      const double y = cy + s * rule.nodes[k];
      const double v = g(x, y);
      if (!std::isfinite(v)) non_finite("expect_2d", x, y, v);
      row += rule.weights[k] * v;
    }
    acc += rule.weights[i] * row;
  }
  return acc / std::numbers::pi;
}

double gaussian_moment_integral(int order, double alpha, double delta) {
  if (!(alpha > 0.0)) throw DomainError("gaussian_moment_integral: alpha must be positive");
  const double e = std::exp(delta * delta / alpha);
  const double root = std::sqrt(std::numbers::pi / alpha);
  switch (order) {
    case 0:
      return root * e;
    case 1:
      return -root / alpha * delta * e;
    case 2:
      return (root / (alpha * alpha) * delta * delta + 0.5 * root / alpha) * e;
    default:
      throw DomainError("gaussian_moment_integral: order must be 0, 1 or 2");
  }
}

}  // namespace relaycrb
