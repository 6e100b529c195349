#pragma once

// Branching process in an i.i.d. two-point random environment with geometric
// offspring on {1, 2, ...}. Given the environment mean m_k, the next
// population is Z_k plus a negative binomial number of extra children.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mclt/rng.hpp"

namespace mclt {

/// Offspring mean is `mean_a` with probability `prob_a`, else `mean_b`.
struct EnvironmentLaw {
  double mean_a = 1.5;
  double mean_b = 2.5;
  double prob_a = 0.5;
};

struct EnvironmentMoments {
  double m;         ///< E m_0
  double sigma_sq;  ///< E (m_0 - m)^2
  double tau_sq;    ///< E (Z_1 - m_0)^2 = E[m_0^2 - m_0] for geometric offspring
  double mu;        ///< E ln m_0
  double nu_sq;     ///< Var ln m_0
};

/// Throws InvalidInput unless both means exceed 1 and the law is
/// non-degenerate (sigma^2 > 0).
void validate(const EnvironmentLaw& law);

EnvironmentMoments env_moments(const EnvironmentLaw& law);

struct BprePath {
  std::vector<double> populations;        ///< Z_0..Z_N, Z_0 = 1
  std::vector<double> environment_means;  ///< m_0..m_{N-1}
  /// False once some Z_k exceeded 2^53 and is carried as a rounded double.
  bool exact_integers = true;

  std::size_t generations() const { return environment_means.size(); }
};

enum class OffspringSampler {
  kAuto,              ///< per-individual for small populations, else mixture
  kPerIndividual,     ///< sum of z geometric draws
  kNegativeBinomial,  ///< z + Poisson(Gamma(z, (1-q)/q))
};

/// Population of the next generation from z parents with offspring mean m.
double sample_next_population(double z, double mean, StepStream& stream,
                              OffspringSampler sampler = OffspringSampler::kAuto);

/// Draws one environment mean.
double sample_environment(const EnvironmentLaw& law, StepStream& stream);

/// N generations from Z_0 = 1. Generation k uses the (replicate, k) stream.
/// Throws OverflowError when Z leaves the double range.
BprePath simulate_bpre(const EnvironmentLaw& law, std::size_t generations,
                       std::uint64_t seed, std::uint64_t replicate = 0);

}  // namespace mclt
