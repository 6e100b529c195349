#pragma once

// Lotka-Nagaev estimator for branching processes in random environment and
// Monte-Carlo checks of its martingale structure.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mclt/distances.hpp"
#include "mclt/environment.hpp"

namespace mclt {

struct LotkaNagaevStat {
  std::size_t n0 = 0;
  std::size_t n = 0;
  double m_hat = 0.0;       ///< (1/n) sum_{k=n0}^{n0+n-1} Z_{k+1} / Z_k
  double normalized = 0.0;  ///< sqrt(n) (m_hat - m) / sigma
};

/// Throws InvalidInput unless n >= 1 and n0 + n <= path.generations().
LotkaNagaevStat lotka_nagaev(const BprePath& path, std::size_t n0, std::size_t n,
                             const EnvironmentLaw& law);

struct ConditionalMomentReport {
  double z = 0.0;
  double target = 0.0;          ///< sigma^2 + tau^2 / z
  double second_moment = 0.0;   ///< MC mean of xi^2, xi = Z'/z - m
  double second_moment_se = 0.0;
  double mean = 0.0;            ///< MC mean of xi
  double mean_se = 0.0;
  bool second_moment_ok = false;  ///< |second_moment - target| <= 3 SE
  bool mean_ok = false;           ///< |mean| <= 3 SE
};

/// One reproduction step from z parents in a fresh environment per replicate.
ConditionalMomentReport conditional_moment_check(const EnvironmentLaw& law, double z,
                                                 std::size_t replicates,
                                                 std::uint64_t seed, unsigned threads = 0);

struct OffspringVarianceReport {
  double mean = 0.0;            ///< fixed environment mean m_0
  double target = 0.0;          ///< m_0^2 - m_0
  double variance = 0.0;        ///< MC variance of Z_1 from Z_0 = 1
  double variance_se = 0.0;
  bool ok = false;
};

/// Var(Z_1 | m_0) against m_0^2 - m_0 for a fixed environment.
OffspringVarianceReport offspring_variance_check(double mean, std::size_t replicates,
                                                 std::uint64_t seed);

struct CltRateRecord {
  std::size_t n = 0;
  DistanceEstimate kolmogorov;
  DistanceEstimate wasserstein;
};

/// Empirical K and W of S_{n0,n} for each n in the sorted grid. One path of
/// length n0 + max(grid) per replicate serves every n. Throws
/// PreconditionError when replicates < 1000.
std::vector<CltRateRecord> clt_rate_experiment(const EnvironmentLaw& law,
                                               const std::vector<std::size_t>& n_grid,
                                               std::size_t n0, std::size_t replicates,
                                               std::uint64_t seed, unsigned threads = 0);

struct LogGrowthReport {
  std::size_t generations = 0;
  std::vector<double> x;
  std::vector<double> probability;  ///< P(|ln Z_N - mu N| / (sqrt(N) nu) >= x)
  std::vector<double> std_error;
  double decay_rate = 0.0;  ///< c in the fitted envelope exp(-c x^2)
  double mean_log_growth = 0.0;     ///< MC mean of ln Z_N / N
  double mean_log_growth_se = 0.0;
  bool monotone = false;
  bool passes = false;
};

/// Tail probabilities of the centered log-population. Throws InvalidInput
/// unless every x lies in (0, mu sqrt(N) / nu].
LogGrowthReport log_growth_tail_check(const EnvironmentLaw& law, std::size_t generations,
                                      const std::vector<double>& x_grid,
                                      std::size_t replicates, std::uint64_t seed,
                                      unsigned threads = 0);

}  // namespace mclt
