#pragma once

// Right-hand sides of the Kolmogorov and Wasserstein-1 bounds evaluated from
// a moment profile, and the search over the smoothing parameter a.
//
// Explicit-constant bounds (all W_* ids) are true upper bounds on
// W(S_n / s_n). The K_* ids carry unspecified absolute constants and are
// evaluated with constant 1 for rate-shape comparisons only.

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mclt/core.hpp"

namespace mclt {

enum class BoundId {
  kKTruncated,
  kKConditional,
  kWStein,
  kWMoment,
  kWThirdMoment,
  kWNonstationary,
};

std::string to_string(BoundId id);
/// Inverse of to_string; also accepts lower case. Throws InvalidInput.
BoundId parse_bound_id(const std::string& text);
bool explicit_constants(BoundId id);

struct BoundReport {
  BoundId id = BoundId::kWStein;
  double a_used = 0.0;
  double total = 0.0;
  std::vector<double> per_k_terms;  ///< k = 1..n
  double tail_term = 0.0;           ///< a / s_n or 2a / s_n
  bool explicit_constants = false;
  double moment_error = 0.0;        ///< propagated SE, 0 for analytic moments
  /// Smallness sum of the conditional-moment hypothesis (K_CONDITIONAL only).
  std::optional<double> hypothesis_sum;
};

/// sum_k [E|X|^3 1{|X| <= tau_{k+1}} / tau_{k+1}^3
///        + (E X^2 1{|X| > tau_{k+1}} + E|sigma^2 - sigma_bar^2|) / tau_{k+1}^2]
/// + a / s_n. Throws PreconditionError for a < 1.
BoundReport k_bound_truncated(const MomentProfile& profile, double a);

/// (1/s_n) sum_k [sup E(|X|^3 1{<= tau_{k+1}} | F) / tau_{k+1}^2
///               + sup E(X^2 1{> tau_{k+1}} | F) / tau_{k+1}]
/// + sum_k E|sigma^2 - sigma_bar^2| / tau_{k+1}^2 + a / s_n.
/// Throws Unsupported when the source has no conditional sup moments.
BoundReport k_bound_conditional(const MomentProfile& profile, double a);

/// (1/s_n) sum_k (E[(sigma^2 + X^2) 1{|X| >= u_k}] / u_k
///               + 2 E[(sigma^2 |X| + |X|^3) 1{|X| < u_k}] / u_k^2) + 2a / s_n,
/// u_k = sqrt(remaining variance + a^2). Requires deterministic conditional
/// variances (PreconditionError otherwise).
BoundReport w_bound_stein(const MomentProfile& profile, double a);

/// (6/s_n) sum_k E|X_k|^{2+delta} / u_k^{1+delta} + 2a / s_n. Requires
/// deterministic conditional variances and delta in (0, 1].
BoundReport w_bound_moment(const MomentProfile& profile, double a, double delta);

/// (3/s_n) sum_k E|X_k|^3 / u_k^2 + 2a / s_n. Requires deterministic
/// conditional variances and a finite third moment.
BoundReport w_bound_third_moment(const MomentProfile& profile, double a);

/// (1/s_n) sum_k [(E|sigma^2 - sigma_bar^2| + E X^2 1{|X| >= tau_k}) / tau_k
///               + (3 sigma_bar^2 E|X| + 2 E|X|^3 1{|X| < tau_k}) / tau_k^2]
/// + 2a / s_n. Note tau_k, not tau_{k+1}.
BoundReport w_bound_nonstationary(const MomentProfile& profile, double a);

/// Dispatch by id; `delta` is used by kWMoment (defaults to the profile's).
BoundReport evaluate_bound(BoundId id, const MomentProfile& profile, double a,
                           std::optional<double> delta = std::nullopt);

/// Throws PreconditionError (or Unsupported) if the bound cannot be
/// evaluated on this profile; used to reject configs before simulating.
void check_admissible(BoundId id, const MomentProfile& profile,
                      std::optional<double> delta = std::nullopt);

using BoundEvaluator = std::function<BoundReport(double)>;

/// Minimizes total over a in [a_lo, a_hi]: 64-point log grid, one
/// golden-section pass around the best grid point. The result is no worse
/// than either endpoint or `analytic_choice` (if inside the range).
/// Throws InvalidInput for an empty range.
BoundReport optimize_a(const BoundEvaluator& evaluator, double a_lo, double a_hi,
                       std::optional<double> analytic_choice = std::nullopt);

/// [max(1e-6, s_n / 1e4), s_n].
std::pair<double, double> default_a_range(const MomentProfile& profile);

}  // namespace mclt
