#include "relaycrb/fim.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>

#include "relaycrb/errors.hpp"
#include "relaycrb/likelihood.hpp"

namespace relaycrb {

namespace {

struct Energies {
  double E1p = 0.0;  // t1^H t1
  double E2p = 0.0;  // t2^H t2
  double E1d = 0.0;  // s1^H s1
  cplx t12;          // t1^H t2
};

Energies energies(const ScenarioParams& sc) {
  Energies e;
  for (std::size_t k = 0; k < sc.L(); ++k) {
    e.E1p += std::norm(sc.t1[k]);
    e.E2p += std::norm(sc.t2[k]);
    e.t12 += std::conj(sc.t1[k]) * sc.t2[k];
  }
  for (const auto& s : sc.s1) e.E1d += std::norm(s);
  return e;
}

// Sums the per-point integrands of all seven expectations over one complex
// Gaussian component CN(center, C), tensor Gauss-Hermite in (x, y).
void accumulate_xy(const Theta& theta, const CoeffTable& ct, double kappa, const QuadRule& rule, cplx center,
                   double weight, std::array<double, 7>& acc) {
  const double s = std::sqrt(ct.C);
  const double norm = weight / std::numbers::pi;
  for (int i = 0; i < rule.n; ++i) {
    const double x = center.real() + s * rule.nodes[i];
    std::array<double, 7> row{};
    for (int k = 0; k < rule.n; ++k) {
      const double y = center.imag() + s * rule.nodes[k];
      const double u = theta.b_R * x + theta.b_I * y;
      const FactorRatios r = factor_ratios(u, ct);
      const double q1 = -2.0 * theta.b_R * r.R0 + 2.0 * x * r.R1;
      const double q2 = -2.0 * theta.b_I * r.R0 + 2.0 * y * r.R1;
      const double q3 = tau_ratio(u, kappa, ct, r);
      const double w = rule.weights[k];
      row[0] += w * 4.0 * ct.A * ct.A * r.R1 * r.R1;
      row[1] += w * q1 * q1;
      row[2] += w * q2 * q2;
      row[3] += w * q3 * q3;
      row[4] += w * q1 * q2;
      row[5] += w * q3 * q1;
      row[6] += w * q3 * q2;
    }
    for (int j = 0; j < 7; ++j) acc[j] += norm * rule.weights[i] * row[j];
  }
}

std::array<double, 7> xy_expectations(const Theta& theta, const ScenarioParams& sc, const QuadRule& rule,
                                      const CoeffTable& ct) {
  const double A2 = sc.A * sc.A;
  const double kappa = A2 / (A2 * theta.tau + 1.0);
  // The observation x + jy is a uniform mixture of CN(A b s2, C). Every
  // integrand is even under (x, y) -> (-x, -y), so s2 and -s2 contribute
  // equally and only the right half-plane is visited.
  const auto& pts = sc.spec2.points();
  const double weight = 2.0 / static_cast<double>(pts.size());
  std::array<double, 7> acc{};
  for (const auto& s2 : pts) {
    if (s2.real() <= 0.0) continue;
    accumulate_xy(theta, ct, kappa, rule, sc.A * theta.b() * s2, weight, acc);
  }
  for (double v : acc) {
    if (!std::isfinite(v)) throw NumericalError("gammas: non-finite expectation");
  }
  return acc;
}

GammaSet from_array(const std::array<double, 7>& a) { return {a[0], a[1], a[2], a[3], a[4], a[5], a[6]}; }

double flip(std::uint32_t flipped, GammaTerm term) {
  return (flipped & static_cast<std::uint32_t>(term)) != 0 ? -1.0 : 1.0;
}

}  // namespace

double FisherMatrix::min_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix5> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0];
}

double FisherMatrix::max_eigenvalue() const {
  Eigen::SelfAdjointEigenSolver<Matrix5> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[4];
}

bool FisherMatrix::is_psd() const {
  Eigen::SelfAdjointEigenSolver<Matrix5> es(m, Eigen::EigenvaluesOnly);
  return es.eigenvalues()[0] >= -1e-8 * std::abs(es.eigenvalues()[4]);
}

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::semi_blind:
      return "semi_blind";
    case Mode::pilot_only:
      return "pilot_only";
    case Mode::blind:
      return "blind";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  if (name == "semi_blind") return Mode::semi_blind;
  if (name == "pilot_only") return Mode::pilot_only;
  if (name == "blind") return Mode::blind;
  throw ConfigError("unknown mode '" + std::string(name) + "' (expected semi_blind, pilot_only or blind)");
}

std::string_view to_string(GammaTerm term) {
  switch (term) {
    case GammaTerm::aa_g1:
      return "aa_g1";
    case GammaTerm::bRbR_g2:
      return "bRbR_g2";
    case GammaTerm::bIbI_g3:
      return "bIbI_g3";
    case GammaTerm::tautau_g4:
      return "tautau_g4";
    case GammaTerm::bRbI_g5:
      return "bRbI_g5";
    case GammaTerm::bRtau_g6:
      return "bRtau_g6";
    case GammaTerm::bItau_g7:
      return "bItau_g7";
  }
  return "unknown";
}

std::optional<GammaTerm> parse_gamma_term(std::string_view name) {
  for (GammaTerm t : kAllGammaTerms) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

GammaSet gammas(const Theta& theta, const ScenarioParams& sc, const QuadRule& rule) {
  const double b2 = theta.b_abs2();
  if (b2 < kMinBAbs2) throw DomainError("gammas: |b|^2 below 1e-12, the u-domain change of variables is singular");
  const CoeffTable ct = coeffs(theta, sc);
  const double A = sc.A;
  const double A2 = A * A;
  const double kappa = A2 / (A2 * theta.tau + 1.0);

  // With u = Re(conj(b) w) and v = -Im(conj(b) w), x = (b_R u + b_I v) / |b|^2 and
  // y = (b_I u - b_R v) / |b|^2. For square QAM, u and v are independent, v has
  // zero mean and E[v^2] = A^2 |b|^4 P2 / 2 + C |b|^2 / 2, and every ratio depends
  // on u alone, so all seven expectations reduce to four moments of u:
  //   m0 = E[R0^2], m1 = E[u R0 R1], m2 = E[u^2 R1^2], m3 = E[R1^2].
  // u is a uniform mixture of N(+-A l |b|^2, C |b|^2 / 2) over the first-quadrant
  // levels l, and each moment is even in u.
  const auto& levels = sc.spec2.q1_levels();
  const double weight = 1.0 / static_cast<double>(levels.size());
  // Zeros of F nearest the real axis sit pi C / (4 A d_p) off it.
  const double s2 = ct.C * b2;
  const double half_width = std::min(std::numbers::pi * ct.C / (4.0 * A * sc.spec2.d_p()), std::sqrt(s2));
  std::array<double, 4> m{};
  for (double level : levels) {
    const auto part = expect_1d_panels(
        [&](double u, std::span<double> out) {
          const FactorRatios r = factor_ratios(u, ct);
          out[0] = r.R0 * r.R0;
          out[1] = u * r.R0 * r.R1;
          out[2] = u * u * r.R1 * r.R1;
          out[3] = r.R1 * r.R1;
        },
        4, s2, rule.n, half_width, A * level * b2);
    for (int k = 0; k < 4; ++k) m[k] += weight * part[k];
  }

  const double bR = theta.b_R;
  const double bI = theta.b_I;
  const double ev2 = 0.5 * A2 * b2 * b2 * sc.spec2.power() + 0.5 * ct.C * b2;
  // q1/F = P1(u) + cx v R1, q2/F = P2(u) + cy v R1, q3/F = P3(u), with
  //   P1 = -2 b_R R0 + 2 (b_R / |b|^2) u R1, cx = 2 b_I / |b|^2
  //   P2 = -2 b_I R0 + 2 (b_I / |b|^2) u R1, cy = -2 b_R / |b|^2
  //   P3 = kappa |b|^2 R0 - 2 kappa u R1.
  // Products of the form (a R0 + c u R1)(a' R0 + c' u R1):
  auto pp = [&](double a, double c, double a2, double c2) {
    return a * a2 * m[0] + (a * c2 + a2 * c) * m[1] + c * c2 * m[2];
  };
  const double p1a = -2.0 * bR, p1c = 2.0 * bR / b2;
  const double p2a = -2.0 * bI, p2c = 2.0 * bI / b2;
  const double p3a = kappa * b2, p3c = -2.0 * kappa;
  const double cx = 2.0 * bI / b2;
  const double cy = -2.0 * bR / b2;

  GammaSet g;
  g.g1 = 4.0 * A2 * m[3];
  g.g2 = pp(p1a, p1c, p1a, p1c) + cx * cx * ev2 * m[3];
  g.g3 = pp(p2a, p2c, p2a, p2c) + cy * cy * ev2 * m[3];
  g.g4 = pp(p3a, p3c, p3a, p3c);
  g.g5 = pp(p1a, p1c, p2a, p2c) + cx * cy * ev2 * m[3];
  g.g6 = pp(p3a, p3c, p1a, p1c);
  g.g7 = pp(p3a, p3c, p2a, p2c);
  for (double v : g.as_array()) {
    if (!std::isfinite(v)) throw NumericalError("gammas: non-finite expectation");
  }
  return g;
}

GammaSet gammas_xy(const Theta& theta, const ScenarioParams& sc, const QuadRule& rule) {
  return from_array(xy_expectations(theta, sc, rule, coeffs(theta, sc)));
}

FisherMatrix exact_fim(const Theta& theta, const ScenarioParams& sc, const QuadRule& rule, const FimOptions& options) {
  sc.validate();
  const double A = sc.A;
  const double A2 = A * A;
  const double sigma2 = sc.sigma2;
  const double C = effective_noise(theta, A, sigma2);
  const double b2 = theta.b_abs2();
  const double N = static_cast<double>(sc.N());
  const double L = static_cast<double>(sc.L());
  const Energies e = energies(sc);
  const double g = 2.0 * A2 / C;
  const double a4s4 = A2 * A2 * sigma2 * sigma2;

  FisherMatrix fim;
  Matrix5& I = fim.m;

  // Gaussian terms common to pilots and data.
  I(0, 0) = I(1, 1) = g * (e.E1p + e.E1d);
  I(2, 2) = I(3, 3) = g * e.E2p;
  I(0, 2) = g * e.t12.real();
  I(0, 3) = -g * e.t12.imag();
  I(1, 2) = g * e.t12.imag();
  I(1, 3) = g * e.t12.real();
  I(4, 4) = -(N + L) * a4s4 / (C * C) + 2.0 * a4s4 / (C * C * C) * ((N + L) * C + N * A2 * b2 * sc.spec2.power());

  if (sc.N() > 0) {
    const GammaSet G = b2 >= kMinBAbs2 ? gammas(theta, sc, rule) : gammas_xy(theta, sc, rule);
    const CoeffTable ct = coeffs(theta, sc);
    const double M = static_cast<double>(sc.spec2.order());
    const double sqrtM = std::sqrt(M);
    double sum_b2 = 0.0, sum_g = 0.0, sum_b55 = 0.0;
    for (std::size_t i = 0; i < ct.levels(); ++i) {
      const double bi2 = ct.beta[i] * ct.beta[i];
      sum_b2 += bi2;
      sum_g += ct.gamma[i];
      sum_b55 += 2.0 * a4s4 / sqrtM * (bi2 * bi2 * b2 * b2 + 4.0 / C * bi2 * b2);
    }
    const double sum_gg = sum_g * sum_g;  // sum_i sum_l gamma_i gamma_l
    const std::uint32_t fl = options.flipped_terms;

    const double aa = -b2 * e.E1d * (8.0 * A2 / sqrtM * sum_b2 - flip(fl, GammaTerm::aa_g1) * G.g1);
    I(0, 0) += aa;
    I(1, 1) += aa;
    I(2, 2) += -32.0 * N / M * sum_gg * theta.b_I * theta.b_I + flip(fl, GammaTerm::bRbR_g2) * 2.0 * N * G.g2;
    I(3, 3) += -32.0 * N / M * sum_gg * theta.b_R * theta.b_R + flip(fl, GammaTerm::bIbI_g3) * 2.0 * N * G.g3;
    I(2, 3) += 32.0 * N / M * sum_gg * theta.b_R * theta.b_I + flip(fl, GammaTerm::bRbI_g5) * 2.0 * N * G.g5;
    I(2, 4) += 8.0 * N * A2 * sigma2 / sqrtM * sum_b2 * theta.b_R + flip(fl, GammaTerm::bRtau_g6) * 2.0 * N * G.g6;
    I(3, 4) += 8.0 * N * A2 * sigma2 / sqrtM * sum_b2 * theta.b_I + flip(fl, GammaTerm::bItau_g7) * 2.0 * N * G.g7;
    I(4, 4) += -2.0 * N * sum_b55 + flip(fl, GammaTerm::tautau_g4) * 2.0 * N * G.g4;
  }
  // I(0,1), I(0,4), I(1,4) are structurally zero.
  for (int r = 0; r < 5; ++r) {
    for (int c = r + 1; c < 5; ++c) I(c, r) = I(r, c);
  }
  if (!I.allFinite()) throw NumericalError("exact_fim: non-finite entry");
  if (options.require_psd && !fim.is_psd()) {
    std::ostringstream os;
    os << "exact_fim: assembled matrix is not positive semidefinite (min eigenvalue " << fim.min_eigenvalue() << ")";
    throw NumericalError(os.str());
  }
  return fim;
}

CrbPair crb(const FisherMatrix& fim, std::string_view label) {
  Eigen::SelfAdjointEigenSolver<Matrix5> es(fim.m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()[0];
  const double hi = es.eigenvalues()[4];
  const double cond = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
  if (!(cond < kMaxCondition)) {
    std::ostringstream os;
    os << "singular Fisher matrix (" << label << "): condition number " << cond;
    throw NumericalError(os.str());
  }
  const Eigen::LDLT<Matrix5> ldlt(fim.m);
  if (ldlt.info() != Eigen::Success) throw NumericalError("crb: factorization failed (" + std::string(label) + ")");
  const Matrix5 inv = ldlt.solve(Matrix5::Identity());
  CrbPair out;
  out.crb_a = inv(0, 0) + inv(1, 1);
  out.crb_b = inv(2, 2) + inv(3, 3);
  out.condition_number = cond;
  if (!(out.crb_a >= 0.0) || !(out.crb_b >= 0.0)) {
    throw NumericalError("crb: negative bound (" + std::string(label) + ")");
  }
  return out;
}

FisherMatrix mfim(const Theta& theta, const ScenarioParams& sc) {
  sc.validate();
  const double A2 = sc.A * sc.A;
  const double C = effective_noise(theta, sc.A, sc.sigma2);
  const double N = static_cast<double>(sc.N());
  const double L = static_cast<double>(sc.L());
  const Energies e = energies(sc);
  const double g = 2.0 * A2 / C;

  FisherMatrix fim;
  Matrix5& J = fim.m;
  J(0, 0) = J(1, 1) = g * (e.E1p + e.E1d);
  J(2, 2) = J(3, 3) = g * (e.E2p + N * sc.spec2.power());
  J(0, 2) = J(2, 0) = g * e.t12.real();
  J(0, 3) = J(3, 0) = -g * e.t12.imag();
  J(1, 2) = J(2, 1) = g * e.t12.imag();
  J(1, 3) = J(3, 1) = g * e.t12.real();
  J(4, 4) = (N + L) * A2 * A2 * sc.sigma2 * sc.sigma2 / (C * C);
  return fim;
}

McrbPair mcrb(const Theta& theta, const ScenarioParams& sc) {
  sc.validate();
  const double A2 = sc.A * sc.A;
  const double C = effective_noise(theta, sc.A, sc.sigma2);
  const Energies e = energies(sc);
  const double ea = e.E1p + e.E1d;
  const double eb = e.E2p + static_cast<double>(sc.N()) * sc.spec2.power();
  const double cross = std::norm(e.t12);
  const double denom = ea * eb - cross;
  if (!(denom > 0.0) || !(eb > 0.0)) throw NumericalError("mcrb: degenerate denominator");
  return {C * eb / (A2 * denom), C / (A2 * eb) * (1.0 + cross / denom)};
}

Mode mode_of(const ScenarioParams& sc) {
  if (sc.N() == 0) return Mode::pilot_only;
  if (sc.L() == 0) return Mode::blind;
  return Mode::semi_blind;
}

CrbReport bounds(const Theta& theta, const ScenarioParams& sc, const QuadRule& rule, bool keep_gammas) {
  CrbReport report;
  report.mode = mode_of(sc);
  const FisherMatrix fim = exact_fim(theta, sc, rule);
  const CrbPair exact = crb(fim, to_string(report.mode));
  const McrbPair modified = mcrb(theta, sc);
  report.crb_a = exact.crb_a;
  report.crb_b = exact.crb_b;
  report.condition_number = exact.condition_number;
  report.mcrb_a = modified.mcrb_a;
  report.mcrb_b = modified.mcrb_b;
  if (keep_gammas && sc.N() > 0) {
    report.gammas = theta.b_abs2() >= kMinBAbs2 ? gammas(theta, sc, rule) : gammas_xy(theta, sc, rule);
  }
  return report;
}

}  // namespace relaycrb
