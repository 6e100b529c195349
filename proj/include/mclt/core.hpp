#pragma once

// Shared data model: realized martingale paths, per-step moment data and the
// a-smoothed remaining-variance scales.
//
// Index conventions. Steps are 0-based in storage (step i holds X_{i+1}).
// Scale sequences are indexed by the 1-based k = 1..n+1 of the notation, so
// that the boundary values rho_bar_{n,n+1} = 0 and tau_{n,n+1} = a exist.
// Cumulative sums (s_k^2, V_k^2) are forward sums in step order.

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace mclt {

class DifferencePath {
 public:
  /// Builds S_k by forward summation. Throws InvalidInput on size mismatch,
  /// empty input or a negative conditional variance.
  DifferencePath(std::vector<double> differences,
                 std::vector<double> conditional_variances);

  std::size_t n() const { return differences_.size(); }
  std::span<const double> differences() const { return differences_; }
  std::span<const double> conditional_variances() const {
    return conditional_variances_;
  }
  std::span<const double> partial_sums() const { return partial_sums_; }
  double endpoint() const { return partial_sums_.back(); }
  /// V_n^2.
  double total_conditional_variance() const;

 private:
  std::vector<double> differences_;
  std::vector<double> conditional_variances_;
  std::vector<double> partial_sums_;
};

/// Which side of the truncation level an indicator keeps.
enum class Cut { kBelow, kAtOrBelow, kAbove, kAtOrAbove };

inline bool keeps(Cut cut, double x, double t) {
  switch (cut) {
    case Cut::kBelow: return x < t;
    case Cut::kAtOrBelow: return x <= t;
    case Cut::kAbove: return x > t;
    case Cut::kAtOrAbove: return x >= t;
  }
  return false;
}

struct MomentValue {
  double value = 0.0;
  double std_error = 0.0;
};

enum class Provider { kAnalytic, kMonteCarlo };

/// Per-step moment functionals of |X_k|. `step` is 0-based.
class MomentSource {
 public:
  virtual ~MomentSource() = default;

  virtual Provider provider() const = 0;
  virtual std::size_t replicates() const { return 0; }
  /// True when sigma_k^2 equals its mean on every path.
  virtual bool deterministic_variance() const = 0;

  /// sigma_bar_k^2 = E X_k^2.
  virtual MomentValue variance(std::size_t step) const = 0;
  /// E[|X_k|^power 1{|X_k| cut t}] for power in {0, 1, 2, 3}.
  virtual MomentValue truncated(std::size_t step, int power, double t,
                                Cut cut) const = 0;
  /// E|X_k|^r; +inf when the moment does not exist.
  virtual MomentValue absolute(std::size_t step, double r) const = 0;
  /// E|sigma_k^2 - sigma_bar_k^2|.
  virtual MomentValue variance_deviation(std::size_t step) const = 0;
  /// ess sup of E[|X_k|^power 1{|X_k| cut t} | F_{k-1}], when known in closed
  /// form.
  virtual std::optional<double> sup_conditional_truncated(std::size_t /*step*/,
                                                          int /*power*/,
                                                          double /*t*/,
                                                          Cut /*cut*/) const {
    return std::nullopt;
  }
};

enum class HorizonCheck {
  kStanding,  ///< reject s_n^2 < 2
  kUnchecked  ///< hand-evaluation of tiny horizons
};

class MomentProfile {
 public:
  /// Cumulative s_k^2 is the forward sum of `source.variance(i).value`.
  MomentProfile(std::size_t n, std::shared_ptr<const MomentSource> source,
                std::optional<double> delta = std::nullopt,
                HorizonCheck check = HorizonCheck::kStanding);

  std::size_t n() const { return variances_.size(); }
  std::span<const double> unconditional_variances() const { return variances_; }
  std::span<const double> cumulative() const { return cumulative_; }
  double total_variance() const { return cumulative_.back(); }
  double s_n() const;
  std::optional<double> delta() const { return delta_; }
  const MomentSource& moments() const { return *source_; }
  Provider provider() const { return source_->provider(); }

 private:
  std::vector<double> variances_;
  std::vector<double> cumulative_;
  std::optional<double> delta_;
  std::shared_ptr<const MomentSource> source_;
};

class ScaleLedger {
 public:
  std::size_t n() const { return n_; }
  double a() const { return a_; }

  bool has_profile_scales() const { return !tau_.empty(); }
  bool has_path_scales() const { return !upsilon_.empty(); }

  /// k in 1..n+1.
  double rho_bar(std::size_t k) const { return rho_bar_[k - 1]; }
  double rho_bar_sq(std::size_t k) const { return rho_bar_sq_[k - 1]; }
  double tau(std::size_t k) const { return tau_[k - 1]; }
  double tau_sq(std::size_t k) const { return tau_sq_[k - 1]; }
  double rho(std::size_t k) const { return rho_[k - 1]; }
  double rho_sq(std::size_t k) const { return rho_sq_[k - 1]; }
  double upsilon(std::size_t k) const { return upsilon_[k - 1]; }
  double upsilon_sq(std::size_t k) const { return upsilon_sq_[k - 1]; }

  std::span<const double> rho_bar_values() const { return rho_bar_; }
  std::span<const double> tau_values() const { return tau_; }
  std::span<const double> rho_values() const { return rho_; }
  std::span<const double> upsilon_values() const { return upsilon_; }

 private:
  friend ScaleLedger build_scale_ledger(const MomentProfile&, double);
  friend ScaleLedger per_path_scales(const DifferencePath&, double);
  friend ScaleLedger per_path_scales(const DifferencePath&,
                                     const MomentProfile&, double);

  std::size_t n_ = 0;
  double a_ = 0.0;
  std::vector<double> rho_bar_sq_, rho_bar_, tau_sq_, tau_;
  std::vector<double> rho_sq_, rho_, upsilon_sq_, upsilon_;
};

/// rho_bar_{n,k} and tau_{n,k} for k = 1..n+1. Throws InvalidInput for a < 0.
ScaleLedger build_scale_ledger(const MomentProfile& profile, double a);

/// rho_{n,k} and upsilon_{n,k} realized along one path.
ScaleLedger per_path_scales(const DifferencePath& path, double a);

/// Both the deterministic and the per-path scales.
ScaleLedger per_path_scales(const DifferencePath& path,
                            const MomentProfile& profile, double a);

}  // namespace mclt
