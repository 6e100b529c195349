#include "mclt/bpre.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "mclt/errors.hpp"
#include "mclt/parallel.hpp"

namespace mclt {

namespace {

constexpr double kExactIntegerLimit = 9007199254740992.0;  // 2^53
constexpr double kPerIndividualLimit = 16.0;
constexpr double kPoissonNormalLimit = 4294967296.0;  // 2^32

struct MeanSe {
  double mean;
  double se;
};

MeanSe mean_se(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += x;
  const double mean = s / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

unsigned resolve(unsigned threads) { return threads ? threads : default_threads(); }

double environment_variance(const EnvironmentLaw& law) {
  const double d = law.mean_a - law.mean_b;
  return law.prob_a * (1.0 - law.prob_a) * d * d;
}

}  // namespace

void validate(const EnvironmentLaw& law) {
  if (!(law.mean_a > 1.0) || !(law.mean_b > 1.0) || !std::isfinite(law.mean_a) ||
      !std::isfinite(law.mean_b)) {
    throw InvalidInput("environment means must be finite and exceed 1");
  }
  if (!(law.prob_a >= 0.0 && law.prob_a <= 1.0)) {
    throw InvalidInput("environment probability must lie in [0, 1]");
  }
  if (!(environment_variance(law) > 0.0)) {
    throw InvalidInput("degenerate environment: sigma^2 = 0");
  }
}

EnvironmentMoments env_moments(const EnvironmentLaw& law) {
  validate(law);
  const double p = law.prob_a, q = 1.0 - p;
  const double a = law.mean_a, b = law.mean_b;
  EnvironmentMoments out;
  out.m = p * a + q * b;
  out.sigma_sq = p * q * (a - b) * (a - b);
  out.tau_sq = p * (a * a - a) + q * (b * b - b);
  const double la = std::log(a), lb = std::log(b);
  out.mu = p * la + q * lb;
  out.nu_sq = p * q * (la - lb) * (la - lb);
  return out;
}

double sample_environment(const EnvironmentLaw& law, StepStream& stream) {
  return stream.uniform() < law.prob_a ? law.mean_a : law.mean_b;
}

double sample_next_population(double z, double mean, StepStream& stream,
                              OffspringSampler sampler) {
  if (!(z >= 1.0)) throw InvalidInput("population must be at least 1");
  if (!(mean > 1.0)) throw InvalidInput("offspring mean must exceed 1");
  if (sampler == OffspringSampler::kAuto) {
    sampler = z <= kPerIndividualLimit ? OffspringSampler::kPerIndividual
                                       : OffspringSampler::kNegativeBinomial;
  }
  if (sampler == OffspringSampler::kPerIndividual) {
    // Geometric on {1, 2, ...} with success 1/mean by inversion.
    const double log_fail = std::log1p(-1.0 / mean);
    double total = 0.0;
    const auto count = static_cast<std::uint64_t>(z);
    for (std::uint64_t i = 0; i < count; ++i) {
      total += 1.0 + std::floor(std::log(stream.uniform_open()) / log_fail);
    }
    return total;
  }
  // Sum of z geometrics minus z is negative binomial: Poisson(Gamma(z, m - 1)).
  std::gamma_distribution<double> gamma(z, mean - 1.0);
  const double lambda = gamma(stream);
  if (!(lambda > 0.0)) return z;
  double extra;
  if (lambda < kPoissonNormalLimit) {
    std::poisson_distribution<long long> poisson(lambda);
    extra = static_cast<double>(poisson(stream));
  } else {
    extra = std::max(0.0, std::round(lambda + std::sqrt(lambda) * stream.normal()));
  }
  return z + extra;
}

BprePath simulate_bpre(const EnvironmentLaw& law, std::size_t generations,
                       std::uint64_t seed, std::uint64_t replicate) {
  validate(law);
  if (generations == 0) throw InvalidInput("need at least one generation");
  const CounterRng rng(seed);
  BprePath path;
  path.populations.reserve(generations + 1);
  path.environment_means.reserve(generations);
  double z = 1.0;
  path.populations.push_back(z);
  for (std::size_t k = 0; k < generations; ++k) {
    auto stream = rng.stream(replicate, static_cast<std::uint32_t>(k));
    const double m = sample_environment(law, stream);
    z = sample_next_population(z, m, stream);
    if (!std::isfinite(z)) {
      throw OverflowError("population left the floating-point range", k + 1);
    }
    if (z > kExactIntegerLimit) path.exact_integers = false;
    path.environment_means.push_back(m);
    path.populations.push_back(z);
  }
  return path;
}

LotkaNagaevStat lotka_nagaev(const BprePath& path, std::size_t n0, std::size_t n,
                             const EnvironmentLaw& law) {
  if (n == 0) throw InvalidInput("window length must be positive");
  if (n0 + n > path.generations()) throw InvalidInput("window exceeds the path");
  const auto mom = env_moments(law);
  double sum = 0.0;
  for (std::size_t k = n0; k < n0 + n; ++k) {
    sum += path.populations[k + 1] / path.populations[k];
  }
  LotkaNagaevStat out;
  out.n0 = n0;
  out.n = n;
  out.m_hat = sum / static_cast<double>(n);
  out.normalized = std::sqrt(static_cast<double>(n)) * (out.m_hat - mom.m) /
                   std::sqrt(mom.sigma_sq);
  return out;
}

ConditionalMomentReport conditional_moment_check(const EnvironmentLaw& law, double z,
                                                 std::size_t replicates,
                                                 std::uint64_t seed, unsigned threads) {
  if (!(z >= 1.0) || z != std::floor(z)) throw InvalidInput("z must be a positive integer");
  if (replicates < 2) throw InvalidInput("need at least two replicates");
  const auto mom = env_moments(law);
  const CounterRng rng(seed);
  std::vector<double> xi(replicates), xi_sq(replicates);
  parallel_for(replicates, resolve(threads), [&](std::size_t r) {
    auto stream = rng.stream(r, 0);
    const double m0 = sample_environment(law, stream);
    const double next = sample_next_population(z, m0, stream);
    xi[r] = next / z - mom.m;
    xi_sq[r] = xi[r] * xi[r];
  });
  ConditionalMomentReport out;
  out.z = z;
  out.target = mom.sigma_sq + mom.tau_sq / z;
  const auto first = mean_se(xi);
  const auto second = mean_se(xi_sq);
  out.mean = first.mean;
  out.mean_se = first.se;
  out.second_moment = second.mean;
  out.second_moment_se = second.se;
  out.mean_ok = std::abs(out.mean) <= 3.0 * out.mean_se;
  out.second_moment_ok = std::abs(out.second_moment - out.target) <= 3.0 * out.second_moment_se;
  return out;
}

OffspringVarianceReport offspring_variance_check(double mean, std::size_t replicates,
                                                 std::uint64_t seed) {
  if (!(mean > 1.0)) throw InvalidInput("offspring mean must exceed 1");
  if (replicates < 2) throw InvalidInput("need at least two replicates");
  const CounterRng rng(seed);
  // Squared deviations from the known mean are unbiased for the variance.
  std::vector<double> dev_sq(replicates);
  for (std::size_t r = 0; r < replicates; ++r) {
    auto stream = rng.stream(r, 0);
    const double d = sample_next_population(1.0, mean, stream) - mean;
    dev_sq[r] = d * d;
  }
  const auto est = mean_se(dev_sq);
  OffspringVarianceReport out;
  out.mean = mean;
  out.target = mean * mean - mean;
  out.variance = est.mean;
  out.variance_se = est.se;
  out.ok = std::abs(out.variance - out.target) <= 3.0 * out.variance_se;
  return out;
}

std::vector<CltRateRecord> clt_rate_experiment(const EnvironmentLaw& law,
                                               const std::vector<std::size_t>& n_grid,
                                               std::size_t n0, std::size_t replicates,
                                               std::uint64_t seed, unsigned threads) {
  if (replicates < 1000) throw PreconditionError("clt_rate_experiment needs >= 1000 replicates");
  if (n_grid.empty()) throw InvalidInput("empty n grid");
  if (!std::is_sorted(n_grid.begin(), n_grid.end()) || n_grid.front() == 0) {
    throw InvalidInput("n grid must be sorted positive integers");
  }
  const auto mom = env_moments(law);
  const double sigma = std::sqrt(mom.sigma_sq);
  const std::size_t horizon = n0 + n_grid.back();
  threads = resolve(threads);
  // stats[j][r]: S_{n0, n_j} on replicate r.
  std::vector<std::vector<double>> stats(n_grid.size(), std::vector<double>(replicates));
  parallel_for(replicates, threads, [&](std::size_t r) {
    const BprePath path = simulate_bpre(law, horizon, seed, r);
    double sum = 0.0;
    std::size_t j = 0;
    for (std::size_t k = 1; k <= n_grid.back(); ++k) {
      sum += path.populations[n0 + k] / path.populations[n0 + k - 1] - mom.m;
      while (j < n_grid.size() && n_grid[j] == k) {
        stats[j][r] = sum / (sigma * std::sqrt(static_cast<double>(k)));
        ++j;
      }
    }
  });
  std::vector<CltRateRecord> out;
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    const auto d = distances_from_sample(std::move(stats[j]), derive_seed(seed, n_grid[j]), threads);
    out.push_back({n_grid[j], d.kolmogorov, d.wasserstein});
  }
  return out;
}

LogGrowthReport log_growth_tail_check(const EnvironmentLaw& law, std::size_t generations,
                                      const std::vector<double>& x_grid,
                                      std::size_t replicates, std::uint64_t seed,
                                      unsigned threads) {
  const auto mom = env_moments(law);
  if (generations == 0) throw InvalidInput("need at least one generation");
  if (replicates < 2) throw InvalidInput("need at least two replicates");
  const double nd = static_cast<double>(generations);
  const double nu = std::sqrt(mom.nu_sq);
  const double x_max = mom.mu * std::sqrt(nd) / nu;
  for (double x : x_grid) {
    if (!(x > 0.0 && x <= x_max)) throw InvalidInput("x grid must lie in (0, mu sqrt(N) / nu]");
  }
  std::vector<double> centered(replicates), growth(replicates);
  parallel_for(replicates, resolve(threads), [&](std::size_t r) {
    const BprePath path = simulate_bpre(law, generations, seed, r);
    const double log_z = std::log(path.populations.back());
    centered[r] = std::abs(log_z - mom.mu * nd) / (std::sqrt(nd) * nu);
    growth[r] = log_z / nd;
  });
  std::sort(centered.begin(), centered.end());

  LogGrowthReport out;
  out.generations = generations;
  out.x = x_grid;
  const double R = static_cast<double>(replicates);
  for (double x : x_grid) {
    const auto at_least = centered.end() - std::lower_bound(centered.begin(), centered.end(), x);
    const double p = static_cast<double>(at_least) / R;
    out.probability.push_back(p);
    out.std_error.push_back(std::sqrt(p * (1.0 - p) / R));
  }
  const auto g = mean_se(growth);
  out.mean_log_growth = g.mean;
  out.mean_log_growth_se = g.se;

  out.monotone = true;
  for (std::size_t i = 1; i < x_grid.size(); ++i) {
    if (x_grid[i] < x_grid[i - 1]) throw InvalidInput("x grid must be sorted");
    const double slack = 3.0 * std::hypot(out.std_error[i], out.std_error[i - 1]);
    if (out.probability[i] > out.probability[i - 1] + slack) out.monotone = false;
  }
  // OLS of ln P on x^2 over the points with positive probability.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t used = 0;
  for (std::size_t i = 0; i < x_grid.size(); ++i) {
    if (!(out.probability[i] > 0.0)) continue;
    const double u = x_grid[i] * x_grid[i];
    const double v = std::log(out.probability[i]);
    sx += u;
    sy += v;
    sxx += u * u;
    sxy += u * v;
    ++used;
  }
  bool decaying = false;
  if (used >= 2) {
    const double k = static_cast<double>(used);
    const double denom = k * sxx - sx * sx;
    if (denom > 0.0) {
      const double slope = (k * sxy - sx * sy) / denom;
      out.decay_rate = -slope;
      decaying = slope < 0.0;
    }
  }
  out.passes = out.monotone && decaying;
  return out;
}

}  // namespace mclt
