#pragma once

// Martingale-difference generators with unit unconditional variances and
// their moment providers.

#include <cstdint>
#include <memory>
#include <string>
#include <variant>

#include "mclt/core.hpp"
#include "mclt/environment.hpp"

namespace mclt {

struct IidGaussian {};

struct Rademacher {};

/// X_k = e_k sqrt(1 + c k^-alpha e_{k-1}) with i.i.d. signs e_0, e_1, ...
struct VarianceDecay {
  double alpha = 0.5;
  double c = 0.5;
};

/// Symmetric Pareto with tail index beta = 2 + delta + tail_margin, scaled to
/// unit variance.
struct HeavyTail {
  double delta = 0.5;
  double tail_margin = 0.05;

  double beta() const { return 2.0 + delta + tail_margin; }
  /// Lower end of the |X| support, sqrt((beta - 2) / beta).
  double scale() const;
};

/// X_k = (Z_{n0+k} / Z_{n0+k-1} - m) / sigma along a branching path.
struct BpreDifference {
  EnvironmentLaw law;
  std::size_t burn_in = 10;
};

using ModelSpec =
    std::variant<IidGaussian, Rademacher, VarianceDecay, HeavyTail, BpreDifference>;

/// Throws InvalidInput on parameters outside the model's domain.
void validate(const ModelSpec& spec);

/// Stable identifier, e.g. "heavy_tail(delta=0.5,eps=0.05)".
std::string model_id(const ModelSpec& spec);

/// Parses "rademacher", "gaussian", "decay:alpha=0.25,c=0.5",
/// "heavy:delta=0.5,eps=0.05", "bpre:ma=1.5,mb=2.5,p=0.5,n0=10".
ModelSpec parse_model(const std::string& text);

bool deterministic_variance(const ModelSpec& spec);

/// One path of length n; replicate r of seed is bit-reproducible.
DifferencePath generate_path(const ModelSpec& spec, std::size_t n,
                             std::uint64_t seed, std::uint64_t replicate = 0);

/// S_n of replicate r without storing the path. Equals
/// generate_path(...).endpoint() bit for bit.
double path_endpoint(const ModelSpec& spec, std::size_t n, std::uint64_t seed,
                     std::uint64_t replicate);

/// Closed-form moment profile. Throws Unsupported for BpreDifference.
MomentProfile analytic_moments(const ModelSpec& spec, std::size_t n,
                               HorizonCheck check = HorizonCheck::kStanding);

std::shared_ptr<const MomentSource> analytic_source(const ModelSpec& spec);

/// Monte-Carlo profile from `replicates` independent paths (memory ~ 6 n R
/// doubles). Throws InvalidInput when replicates < 100.
MomentProfile estimate_moments(const ModelSpec& spec, std::size_t n,
                               std::size_t replicates, std::uint64_t seed,
                               HorizonCheck check = HorizonCheck::kStanding);

}  // namespace mclt
