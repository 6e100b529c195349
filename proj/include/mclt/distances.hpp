#pragma once

// Kolmogorov and Wasserstein-1 distances from a discrete law to N(0, 1).

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "mclt/models.hpp"

namespace mclt {

struct DiscreteDistribution {
  std::vector<double> support;        ///< strictly increasing
  std::vector<double> probabilities;  ///< positive, sum to 1 within 1e-12

  /// Throws InvalidInput when the invariants fail.
  void validate() const;
};

enum class DistanceMethod { kExactEnumeration, kEmpiricalExactIntegral };

std::string to_string(DistanceMethod method);

struct DistanceEstimate {
  double value = 0.0;
  double std_error = 0.0;
  DistanceMethod method = DistanceMethod::kExactEnumeration;
  std::size_t sample_size = 0;
};

struct DistancePair {
  DistanceEstimate kolmogorov;
  DistanceEstimate wasserstein;
};

DistanceEstimate kolmogorov_exact(const DiscreteDistribution& dist);
DistanceEstimate wasserstein_exact(const DiscreteDistribution& dist);

/// Integral of |F - Phi| by adaptive Gauss-Kronrod on each support gap.
/// Slow; the cross-check for wasserstein_exact.
double wasserstein_quadrature(const DiscreteDistribution& dist);

/// Empirical law of a sample (equal atoms merged).
DiscreteDistribution empirical_distribution(std::vector<double> sample);

/// K with the 95% DKW half-width sqrt(ln 40 / 2m) as std_error, W with a
/// 200-resample bootstrap std_error. `seed` drives the bootstrap only.
DistancePair distances_from_sample(std::vector<double> sample, std::uint64_t seed,
                                   unsigned threads = 0);

/// Monte-Carlo K and W of S_n / sqrt(n). Throws InvalidInput when
/// replicates < 1000. threads = 0 uses default_threads().
DistancePair estimate_distances_mc(const ModelSpec& spec, std::size_t n,
                                   std::size_t replicates, std::uint64_t seed,
                                   unsigned threads = 0);

/// Exact law of S_n / s_n for Rademacher and variance-decay models, n <= 20.
/// Throws Unsupported for other models and InvalidInput for n out of range.
DiscreteDistribution enumerate_law(const ModelSpec& spec, std::size_t n);

/// (2 / pi)^(1/4).
inline constexpr double kKwConstant = 0.8932438417380023;

struct KwCheck {
  bool holds = true;
  double slack = 0.0;      ///< bound + allowance - K
  double allowance = 0.0;  ///< 3 SE of K plus the propagated 3 SE of W
};

KwCheck kw_relation_check(const DistanceEstimate& k, const DistanceEstimate& w);

}  // namespace mclt
