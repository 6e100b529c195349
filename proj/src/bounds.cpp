#include "mclt/bounds.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>

#include "mclt/errors.hpp"

namespace mclt {

namespace {


// Accumulates per-k terms in index order; errors add term by term.
struct Accumulator {
  explicit Accumulator(BoundId id, double a, std::size_t n) {
    report.id = id;
    report.a_used = a;
    report.explicit_constants = explicit_constants(id);
    report.per_k_terms.reserve(n);
  }
  void add(double term, double error) {
    report.per_k_terms.push_back(term);
    error_sum += error;
  }
  BoundReport finish(double tail) {
    report.tail_term = tail;
    double total = 0.0;
    for (double t : report.per_k_terms) total += t;
    report.total = total + tail;
    report.moment_error = error_sum;
    return report;
  }
  BoundReport report;
  double error_sum = 0.0;
};

void check_a(double a) {
  if (!(a >= 0.0) || !std::isfinite(a)) throw InvalidInput("a must be finite and >= 0");
}

void require_deterministic(const MomentProfile& profile, BoundId id) {
  if (!profile.moments().deterministic_variance()) {
    throw PreconditionError(to_string(id) +
                            " needs V_n^2 = s_n^2 (deterministic conditional variances)");
  }
}

}  // namespace

std::string to_string(BoundId id) {
  switch (id) {
    case BoundId::kKTruncated: return "K_TRUNCATED";
    case BoundId::kKConditional: return "K_CONDITIONAL";
    case BoundId::kWStein: return "W_STEIN";
    case BoundId::kWMoment: return "W_MOMENT";
    case BoundId::kWThirdMoment: return "W_THIRD_MOMENT";
    case BoundId::kWNonstationary: return "W_NONSTATIONARY";
  }
  return "UNKNOWN";
}

BoundId parse_bound_id(const std::string& text) {
  std::string up;
  for (char c : text) up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (BoundId id : {BoundId::kKTruncated, BoundId::kKConditional, BoundId::kWStein,
                     BoundId::kWMoment, BoundId::kWThirdMoment, BoundId::kWNonstationary}) {
    if (to_string(id) == up) return id;
  }
  throw InvalidInput("unknown bound id '" + text + "'");
}

bool explicit_constants(BoundId id) {
  return id != BoundId::kKTruncated && id != BoundId::kKConditional;
}

BoundReport k_bound_truncated(const MomentProfile& profile, double a) {
  check_a(a);
  if (a < 1.0) throw PreconditionError("K_TRUNCATED needs a >= 1");
  const auto ledger = build_scale_ledger(profile, a);
  const auto& mom = profile.moments();
  const std::size_t n = profile.n();
  Accumulator acc(BoundId::kKTruncated, a, n);
  for (std::size_t k = 1; k <= n; ++k) {
    const double t = ledger.tau(k + 1);
    const double t2 = ledger.tau_sq(k + 1);
    const auto cubic = mom.truncated(k - 1, 3, t, Cut::kAtOrBelow);
    const auto square = mom.truncated(k - 1, 2, t, Cut::kAbove);
    const auto dev = mom.variance_deviation(k - 1);
    acc.add(cubic.value / (t2 * t) + (square.value + dev.value) / t2,
            cubic.std_error / (t2 * t) + (square.std_error + dev.std_error) / t2);
  }
  return acc.finish(a / profile.s_n());
}

BoundReport k_bound_conditional(const MomentProfile& profile, double a) {
  check_a(a);
  if (!(a > 0.0)) throw PreconditionError("K_CONDITIONAL needs a > 0");
  const auto ledger = build_scale_ledger(profile, a);
  const auto& mom = profile.moments();
  const std::size_t n = profile.n();
  const double s_n = profile.s_n();
  Accumulator acc(BoundId::kKConditional, a, n);
  double hypothesis = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    const double t = ledger.tau(k + 1);
    const double t2 = ledger.tau_sq(k + 1);
    const auto cubic = mom.sup_conditional_truncated(k - 1, 3, t, Cut::kAtOrBelow);
    const auto square = mom.sup_conditional_truncated(k - 1, 2, t, Cut::kAbove);
    if (!cubic || !square) {
      throw Unsupported("K_CONDITIONAL needs closed-form conditional sup moments");
    }
    const auto dev = mom.variance_deviation(k - 1);
    acc.add((*cubic / t2 + *square / t) / s_n + dev.value / t2, dev.std_error / t2);
    hypothesis += *cubic / (t2 * t) + *square / t2;
  }
  auto report = acc.finish(a / s_n);
  report.hypothesis_sum = hypothesis;
  return report;
}

BoundReport w_bound_stein(const MomentProfile& profile, double a) {
  check_a(a);
  require_deterministic(profile, BoundId::kWStein);
  const auto ledger = build_scale_ledger(profile, a);
  const auto& mom = profile.moments();
  const std::size_t n = profile.n();
  const double s_n = profile.s_n();
  Accumulator acc(BoundId::kWStein, a, n);
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t i = k - 1;
    const double u = ledger.tau(k);
    const double u2 = ledger.tau_sq(k);
    const auto var = mom.variance(i);
    const auto p_hi = mom.truncated(i, 0, u, Cut::kAtOrAbove);
    const auto m2_hi = mom.truncated(i, 2, u, Cut::kAtOrAbove);
    const auto m1_lo = mom.truncated(i, 1, u, Cut::kBelow);
    const auto m3_lo = mom.truncated(i, 3, u, Cut::kBelow);
    const double term = (var.value * p_hi.value + m2_hi.value) / u +
                        2.0 * (var.value * m1_lo.value + m3_lo.value) / u2;
    const double err = (var.value * p_hi.std_error + m2_hi.std_error) / u +
                       2.0 * (var.value * m1_lo.std_error + m3_lo.std_error) / u2 +
                       (p_hi.value / u + 2.0 * m1_lo.value / u2) * var.std_error;
    acc.add(term / s_n, err / s_n);
  }
  return acc.finish(2.0 * a / s_n);
}

BoundReport w_bound_moment(const MomentProfile& profile, double a, double delta) {
  check_a(a);
  if (!(delta > 0.0 && delta <= 1.0)) throw PreconditionError("delta must lie in (0, 1]");
  require_deterministic(profile, BoundId::kWMoment);
  const auto ledger = build_scale_ledger(profile, a);
  const auto& mom = profile.moments();
  const std::size_t n = profile.n();
  const double s_n = profile.s_n();
  Accumulator acc(BoundId::kWMoment, a, n);
  for (std::size_t k = 1; k <= n; ++k) {
    const auto m = mom.absolute(k - 1, 2.0 + delta);
    const double denom = std::pow(ledger.tau_sq(k), 0.5 * (1.0 + delta));
    acc.add(6.0 * m.value / denom / s_n, 6.0 * m.std_error / denom / s_n);
  }
  return acc.finish(2.0 * a / s_n);
}

BoundReport w_bound_third_moment(const MomentProfile& profile, double a) {
  check_a(a);
  require_deterministic(profile, BoundId::kWThirdMoment);
  const auto ledger = build_scale_ledger(profile, a);
  const auto& mom = profile.moments();
  const std::size_t n = profile.n();
  const double s_n = profile.s_n();
  Accumulator acc(BoundId::kWThirdMoment, a, n);
  for (std::size_t k = 1; k <= n; ++k) {
    const auto m = mom.absolute(k - 1, 3.0);
    if (!std::isfinite(m.value)) {
      throw PreconditionError("W_THIRD_MOMENT needs a finite third moment");
    }
    const double u2 = ledger.tau_sq(k);
    acc.add(3.0 * m.value / u2 / s_n, 3.0 * m.std_error / u2 / s_n);
  }
  return acc.finish(2.0 * a / s_n);
}

BoundReport w_bound_nonstationary(const MomentProfile& profile, double a) {
  check_a(a);
  const auto ledger = build_scale_ledger(profile, a);
  const auto& mom = profile.moments();
  const std::size_t n = profile.n();
  const double s_n = profile.s_n();
  Accumulator acc(BoundId::kWNonstationary, a, n);
  for (std::size_t k = 1; k <= n; ++k) {
    const std::size_t i = k - 1;
    const double t = ledger.tau(k);
    const double t2 = ledger.tau_sq(k);
    const auto var = mom.variance(i);
    const auto dev = mom.variance_deviation(i);
    const auto m2_hi = mom.truncated(i, 2, t, Cut::kAtOrAbove);
    const auto m1 = mom.absolute(i, 1.0);
    const auto m3_lo = mom.truncated(i, 3, t, Cut::kBelow);
    const double term = (dev.value + m2_hi.value) / t +
                        (3.0 * var.value * m1.value + 2.0 * m3_lo.value) / t2;
    const double err = (dev.std_error + m2_hi.std_error) / t +
                       (3.0 * (var.value * m1.std_error + m1.value * var.std_error) +
                        2.0 * m3_lo.std_error) / t2;
    acc.add(term / s_n, err / s_n);
  }
  return acc.finish(2.0 * a / s_n);
}

BoundReport evaluate_bound(BoundId id, const MomentProfile& profile, double a,
                           std::optional<double> delta) {
  switch (id) {
    case BoundId::kKTruncated: return k_bound_truncated(profile, a);
    case BoundId::kKConditional: return k_bound_conditional(profile, a);
    case BoundId::kWStein: return w_bound_stein(profile, a);
    case BoundId::kWMoment: {
      const auto d = delta ? delta : profile.delta();
      if (!d) throw PreconditionError("W_MOMENT needs delta");
      return w_bound_moment(profile, a, *d);
    }
    case BoundId::kWThirdMoment: return w_bound_third_moment(profile, a);
    case BoundId::kWNonstationary: return w_bound_nonstationary(profile, a);
  }
  throw InvalidInput("unknown bound id");
}

void check_admissible(BoundId id, const MomentProfile& profile, std::optional<double> delta) {
  const double a = std::max(1.0, profile.s_n());
  const auto r = evaluate_bound(id, profile, a, delta);
  if (!std::isfinite(r.total)) {
    throw PreconditionError(to_string(id) + " is not finite for this model");
  }
}

BoundReport optimize_a(const BoundEvaluator& evaluator, double a_lo, double a_hi,
                       std::optional<double> analytic_choice) {
  if (!(a_lo <= a_hi) || !std::isfinite(a_hi) || a_lo < 0.0) {
    throw InvalidInput("empty or invalid a range");
  }
  if (a_lo == a_hi) return evaluator(a_lo);

  BoundReport best = evaluator(a_lo);
  auto consider = [&](const BoundReport& r) {
    if (r.total < best.total) best = r;
  };
  // The log grid starts at a_lo, or just above it when a_lo = 0.
  const double lo = a_lo > 0.0 ? a_lo : a_hi * 1e-9;
  constexpr int kGrid = 64;
  std::vector<double> grid(kGrid);
  std::vector<double> totals(kGrid);
  const double log_lo = std::log(lo), log_hi = std::log(a_hi);
  for (int i = 0; i < kGrid; ++i) {
    grid[i] = i == kGrid - 1 ? a_hi : std::exp(log_lo + (log_hi - log_lo) * i / (kGrid - 1));
    if (i == 0) grid[i] = lo;
    const auto r = evaluator(grid[i]);
    totals[i] = r.total;
    consider(r);
  }
  const auto best_index = static_cast<int>(
      std::min_element(totals.begin(), totals.end()) - totals.begin());
  double left = std::log(grid[std::max(0, best_index - 1)]);
  double right = std::log(grid[std::min(kGrid - 1, best_index + 1)]);
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = right - ratio * (right - left);
  double x2 = left + ratio * (right - left);
  double f1 = evaluator(std::exp(x1)).total;
  double f2 = evaluator(std::exp(x2)).total;
  for (int it = 0; it < 48; ++it) {
    if (f1 <= f2) {
      right = x2;
      x2 = x1;
      f2 = f1;
      x1 = right - ratio * (right - left);
      f1 = evaluator(std::exp(x1)).total;
    } else {
      left = x1;
      x1 = x2;
      f1 = f2;
      x2 = left + ratio * (right - left);
      f2 = evaluator(std::exp(x2)).total;
    }
  }
  consider(evaluator(std::exp(0.5 * (left + right))));
  if (analytic_choice && *analytic_choice >= a_lo && *analytic_choice <= a_hi) {
    consider(evaluator(*analytic_choice));
  }
  return best;
}

std::pair<double, double> default_a_range(const MomentProfile& profile) {
  const double s_n = profile.s_n();
  return {std::max(1e-6, s_n / 1e4), s_n};
}

}  // namespace mclt
