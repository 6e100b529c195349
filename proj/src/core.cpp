#include "mclt/core.hpp"

#include <cmath>
#include <string>

#include "mclt/errors.hpp"

namespace mclt {

DifferencePath::DifferencePath(std::vector<double> differences,
                               std::vector<double> conditional_variances)
    : differences_(std::move(differences)),
      conditional_variances_(std::move(conditional_variances)) {
  if (differences_.empty()) throw InvalidInput("path horizon must be positive");
  if (differences_.size() != conditional_variances_.size()) {
    throw InvalidInput("differences and conditional variances differ in length");
  }
  for (double v : conditional_variances_) {
    if (!(v >= 0.0)) throw InvalidInput("negative conditional variance");
  }
  partial_sums_.resize(differences_.size());
  double s = 0.0;
  for (std::size_t i = 0; i < differences_.size(); ++i) {
    s += differences_[i];
    partial_sums_[i] = s;
  }
}

double DifferencePath::total_conditional_variance() const {
  double v = 0.0;
  for (double c : conditional_variances_) v += c;
  return v;
}

MomentProfile::MomentProfile(std::size_t n,
                             std::shared_ptr<const MomentSource> source,
                             std::optional<double> delta, HorizonCheck check)
    : delta_(delta), source_(std::move(source)) {
  if (n == 0) throw InvalidInput("horizon must be positive");
  if (!source_) throw InvalidInput("moment source is null");
  if (delta_ && !(*delta_ > 0.0 && *delta_ <= 1.0)) {
    throw InvalidInput("delta must lie in (0, 1]");
  }
  variances_.resize(n);
  cumulative_.resize(n);
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double v = source_->variance(i).value;
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw InvalidInput("unconditional variance at step " + std::to_string(i + 1) +
                         " must be positive and finite");
    }
    variances_[i] = v;
    s += v;
    cumulative_[i] = s;
  }
  if (check == HorizonCheck::kStanding && s < 2.0) {
    throw InvalidInput("total variance s_n^2 = " + std::to_string(s) +
                       " is below the standing assumption s_n^2 >= 2");
  }
}

double MomentProfile::s_n() const { return std::sqrt(total_variance()); }

ScaleLedger build_scale_ledger(const MomentProfile& profile, double a) {
  if (!(a >= 0.0) || !std::isfinite(a)) {
    throw InvalidInput("smoothing parameter a must be finite and >= 0");
  }
  const std::size_t n = profile.n();
  if (n == 0) throw InvalidInput("horizon must be positive");
  const auto cum = profile.cumulative();
  const double total = cum.back();
  const double a_sq = a * a;

  ScaleLedger ledger;
  ledger.n_ = n;
  ledger.a_ = a;
  ledger.rho_bar_sq_.resize(n + 1);
  ledger.rho_bar_.resize(n + 1);
  ledger.tau_sq_.resize(n + 1);
  ledger.tau_.resize(n + 1);
  for (std::size_t k = 1; k <= n + 1; ++k) {
    const double before = k == 1 ? 0.0 : cum[k - 2];
    const double r2 = total - before;
    ledger.rho_bar_sq_[k - 1] = r2;
    ledger.rho_bar_[k - 1] = std::sqrt(r2);
    ledger.tau_sq_[k - 1] = r2 + a_sq;
    ledger.tau_[k - 1] = std::sqrt(r2 + a_sq);
  }
  return ledger;
}

namespace {

void fill_path_scales(const DifferencePath& path, double a,
                      std::vector<double>& rho_sq, std::vector<double>& rho,
                      std::vector<double>& ups_sq, std::vector<double>& ups) {
  const auto var = path.conditional_variances();
  const std::size_t n = var.size();
  std::vector<double> cum(n);
  double v = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    v += var[i];
    cum[i] = v;
  }
  const double a_sq = a * a;
  rho_sq.resize(n + 1);
  rho.resize(n + 1);
  ups_sq.resize(n + 1);
  ups.resize(n + 1);
  for (std::size_t k = 1; k <= n + 1; ++k) {
    const double before = k == 1 ? 0.0 : cum[k - 2];
    const double r2 = v - before;
    rho_sq[k - 1] = r2;
    rho[k - 1] = std::sqrt(r2);
    ups_sq[k - 1] = r2 + a_sq;
    ups[k - 1] = std::sqrt(r2 + a_sq);
  }
}

}  // namespace

ScaleLedger per_path_scales(const DifferencePath& path, double a) {
  if (!(a >= 0.0) || !std::isfinite(a)) {
    throw InvalidInput("smoothing parameter a must be finite and >= 0");
  }
  ScaleLedger ledger;
  ledger.n_ = path.n();
  ledger.a_ = a;
  fill_path_scales(path, a, ledger.rho_sq_, ledger.rho_,
                   ledger.upsilon_sq_, ledger.upsilon_);
  return ledger;
}

ScaleLedger per_path_scales(const DifferencePath& path,
                            const MomentProfile& profile, double a) {
  if (path.n() != profile.n()) {
    throw InvalidInput("path and profile horizons differ");
  }
  ScaleLedger ledger = build_scale_ledger(profile, a);
  fill_path_scales(path, a, ledger.rho_sq_, ledger.rho_,
                   ledger.upsilon_sq_, ledger.upsilon_);
  return ledger;
}

}  // namespace mclt
