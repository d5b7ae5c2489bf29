#include "relaycrb/oracle.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include "relaycrb/errors.hpp"
#include "relaycrb/parallel.hpp"

namespace relaycrb {

namespace {

thread_local std::size_t last_rejections = 0;

constexpr int kPairs = 15;

// Upper-triangular (r, c) pairs in row-major order.
constexpr std::array<std::pair<int, int>, kPairs> upper_pairs() {
  std::array<std::pair<int, int>, kPairs> out{};
  int n = 0;
  for (int r = 0; r < 5; ++r) {
    for (int c = r; c < 5; ++c) out[n++] = {r, c};
  }
  return out;
}

std::array<double, 5> fd_score(const Observation& obs, const Theta& theta, const ScenarioParams& sc,
                               LikelihoodMethod method) {
  const std::array<double, 5> base = theta.as_array();
  std::array<double, 5> g{};
  for (int i = 0; i < 5; ++i) {
    const double h = 1e-5 * std::max(std::abs(base[i]), 1.0);
    auto plus = base;
    auto minus = base;
    plus[i] += h;
    minus[i] -= h;
    if (i == 4 && minus[i] < 0.0) {
      // tau must stay non-negative: forward difference at the boundary.
      minus[i] = base[i];
      g[i] = (log_likelihood(obs, Theta::from_array(plus), sc, method) -
              log_likelihood(obs, Theta::from_array(minus), sc, method)) /
             h;
      continue;
    }
    g[i] = (log_likelihood(obs, Theta::from_array(plus), sc, method) -
            log_likelihood(obs, Theta::from_array(minus), sc, method)) /
           (2.0 * h);
  }
  return g;
}

}  // namespace

void RunningStats::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double n = static_cast<double>(n_ + other.n_);
  const double delta = other.mean_ - mean_;
  mean_ += delta * static_cast<double>(other.n_) / n;
  m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / n;
  n_ += other.n_;
}

double RunningStats::variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }

double RunningStats::standard_error() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

FisherMatrix mc_fim(const Theta& theta, const ScenarioParams& sc, std::size_t n_samples, std::uint64_t root_seed,
                    const McOptions& options) {
  if (n_samples < 10000) throw DomainError("mc_fim: n_samples must be at least 1e4");
  sc.validate();
  constexpr auto pairs = upper_pairs();
  const std::size_t chunk = std::max<std::size_t>(options.chunk_size, 1);
  const std::size_t n_chunks = (n_samples + chunk - 1) / chunk;

  struct ChunkResult {
    std::array<RunningStats, kPairs> stats;
    std::size_t rejected = 0;
  };
  std::vector<ChunkResult> results(n_chunks);

  parallel_for(
      n_chunks,
      [&](std::size_t c) {
        Rng rng = make_rng(root_seed, c);
        const std::size_t begin = c * chunk;
        const std::size_t end = std::min(n_samples, begin + chunk);
        ChunkResult& out = results[c];
        for (std::size_t s = begin; s < end; ++s) {
          const CVector s2 = draw_symbols(rng, sc.spec2, sc.N());
          const Observation obs = simulate_observation(rng, theta, sc, s2);
          const auto g = fd_score(obs, theta, sc, options.method);
          bool finite = true;
          for (double v : g) finite = finite && std::isfinite(v);
          if (!finite) {
            ++out.rejected;
            continue;
          }
          for (int p = 0; p < kPairs; ++p) out.stats[p].add(g[pairs[p].first] * g[pairs[p].second]);
        }
      },
      options.threads);

  std::array<RunningStats, kPairs> total;
  std::size_t rejected = 0;
  for (const auto& r : results) {
    for (int p = 0; p < kPairs; ++p) total[p].merge(r.stats[p]);
    rejected += r.rejected;
  }
  last_rejections = rejected;
  if (static_cast<double>(rejected) > 1e-3 * static_cast<double>(n_samples)) {
    std::ostringstream os;
    os << "mc_fim: " << rejected << " of " << n_samples << " samples produced a non-finite score";
    throw NumericalError(os.str());
  }

  FisherMatrix fim;
  fim.provenance = Provenance::monte_carlo;
  Matrix5 se = Matrix5::Zero();
  for (int p = 0; p < kPairs; ++p) {
    const auto [r, c] = pairs[p];
    fim.m(r, c) = fim.m(c, r) = total[p].mean();
    se(r, c) = se(c, r) = total[p].standard_error();
  }
  fim.se = se;
  return fim;
}

std::size_t mc_fim_last_rejections() { return last_rejections; }

std::vector<IdentityReport> check_identities(const Theta& theta, const ScenarioParams& sc, std::size_t n_samples,
                                             std::uint64_t root_seed) {
  if (n_samples < 100000) throw DomainError("check_identities: n_samples must be at least 1e5");
  if (std::sqrt(theta.b_abs2()) <= 1e-6) throw DomainError("check_identities: |b| must exceed 1e-6");

  const double A = sc.A;
  const double A2 = A * A;
  const double C = effective_noise(theta, A, sc.sigma2);
  const double sigma2 = sc.sigma2;
  const double b2 = theta.b_abs2();
  const double bR = theta.b_R;
  const double bI = theta.b_I;
  const CoeffTable ct = coeffs(sc.spec2, A, C, b2);
  const std::size_t K = ct.levels();
  const double M = static_cast<double>(sc.spec2.order());
  const double sqrtM = std::sqrt(M);
  const double kappa = A2 * sigma2 / C;
  for (std::size_t i = 0; i < K; ++i) {
    if (ct.gamma[i] * b2 > 600.0) throw DomainError("check_identities: gamma_i |b|^2 too large for e^{gamma|b|^2}");
  }
  const cplx s1k = sc.N() > 0 ? sc.s1.front() : std::sqrt(sc.P1) * cplx(1.0, 1.0) / std::sqrt(2.0);
  const cplx s1b = std::conj(s1k) * theta.b();

  // Sample layout: per level i {cosh, x sinh, x^2 cosh, u sinh, u^2 cosh}, then B11, B33, B55.
  const std::size_t n_stats = 5 * K + 3;
  const std::size_t chunk = 5000;
  const std::size_t n_chunks = (n_samples + chunk - 1) / chunk;
  std::vector<std::vector<RunningStats>> partial(n_chunks, std::vector<RunningStats>(n_stats));

  std::vector<double> lift(K);  // e^{gamma_i |b|^2}
  for (std::size_t i = 0; i < K; ++i) lift[i] = std::exp(ct.gamma[i] * b2);

  parallel_for(n_chunks, [&](std::size_t ci) {
    Rng rng = make_rng(root_seed, ci);
    std::uniform_int_distribution<std::size_t> pick(0, sc.spec2.points().size() - 1);
    std::vector<double> c(K), s(K);
    auto& st = partial[ci];
    const std::size_t end = std::min(n_samples, (ci + 1) * chunk);
    for (std::size_t n = ci * chunk; n < end; ++n) {
      const cplx s2 = sc.spec2.points()[pick(rng)];
      const cplx z = A * theta.a() * s1k + A * theta.b() * s2 + sample_cn(rng, C);
      const cplx w = z - A * theta.a() * s1k;
      const double x = w.real();
      const double y = w.imag();
      const double u = bR * x + bI * y;
      level_ratios(u, ct, c, s);
      double b11 = 0.0, b33 = 0.0, b55 = 0.0;
      for (std::size_t i = 0; i < K; ++i) {
        const double be = ct.beta[i];
        const double ga = ct.gamma[i];
        st[5 * i + 0].add(c[i] * lift[i]);
        st[5 * i + 1].add(x * s[i] * lift[i]);
        st[5 * i + 2].add(x * x * c[i] * lift[i]);
        st[5 * i + 3].add(u * s[i] * lift[i]);
        st[5 * i + 4].add(u * u * c[i] * lift[i]);
        b11 += be * be * c[i];
        b33 += (4.0 * ga * ga * bR * bR - 2.0 * ga) * c[i] - 8.0 * be * ga * bR * x * s[i] + 4.0 * be * be * x * x * c[i];
        b55 += (ga * ga * b2 * b2 - 2.0 * ga * b2) * c[i] + (4.0 * be - 4.0 * ga * be * b2) * u * s[i] +
               4.0 * be * be * u * u * c[i];
      }
      st[5 * K + 0].add(4.0 * A2 * s1b.real() * s1b.real() * b11);
      st[5 * K + 1].add(b33);
      st[5 * K + 2].add(kappa * kappa * b55);
    }
  });

  std::vector<RunningStats> total(n_stats);
  for (const auto& p : partial) {
    for (std::size_t k = 0; k < n_stats; ++k) total[k].merge(p[k]);
  }

  double sum_g = 0.0, sum_b2 = 0.0, sum_b55 = 0.0;
  for (std::size_t i = 0; i < K; ++i) {
    const double bi2 = ct.beta[i] * ct.beta[i];
    sum_g += ct.gamma[i];
    sum_b2 += bi2;
    sum_b55 += 2.0 * A2 * A2 * sigma2 * sigma2 / sqrtM * (bi2 * bi2 * b2 * b2 + 4.0 / C * bi2 * b2);
  }

  std::vector<IdentityReport> out;
  auto report = [&](std::string name, double analytic, const RunningStats& rs) {
    IdentityReport r;
    r.name = std::move(name);
    r.analytic = analytic;
    r.mc_estimate = rs.mean();
    r.mc_se = rs.standard_error();
    const double diff = r.mc_estimate - analytic;
    // Some ratios are constant for M = 4; their sample spread is pure rounding.
    const double scale = std::max(r.mc_se, 1e-12 * std::max(std::abs(analytic), 1.0));
    r.z_score = diff / scale;
    r.pass = std::abs(r.z_score) <= kIdentityZThreshold;
    out.push_back(std::move(r));
  };

  for (std::size_t i = 0; i < K; ++i) {
    const std::string tag = "[i=" + std::to_string(i + 1) + "]";
    const double lifted = lift[i];
    const double be = ct.beta[i];
    const double ga = ct.gamma[i];
    report("cosh_ratio" + tag, 2.0 / sqrtM * lifted, total[5 * i + 0]);
    report("x_sinh_ratio" + tag, 2.0 * C / sqrtM * lifted * be * bR, total[5 * i + 1]);
    report("x2_cosh_ratio" + tag,
           lifted * (C / sqrtM + 2.0 * C / sqrtM * ga * bR * bR + 4.0 * C / M * sum_g * bI * bI), total[5 * i + 2]);
    report("u_sinh_ratio" + tag, 2.0 / sqrtM * C * b2 * lifted * be, total[5 * i + 3]);
    report("u2_cosh_ratio" + tag, lifted / sqrtM * (2.0 * C * C * b2 * b2 * be * be + C * b2), total[5 * i + 4]);
  }
  report("a_curvature", 8.0 * A2 / sqrtM * sum_b2 * s1b.real() * s1b.real(), total[5 * K + 0]);
  report("b_curvature", 16.0 / M * sum_g * sum_g * bI * bI, total[5 * K + 1]);
  report("tau_curvature", sum_b55, total[5 * K + 2]);
  return out;
}

}  // namespace relaycrb
