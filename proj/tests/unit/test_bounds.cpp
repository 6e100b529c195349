#include <cmath>
#include <numeric>

#include "doctest.h"
#include "mclt/bounds.hpp"
#include "mclt/distances.hpp"
#include "mclt/errors.hpp"
#include "mclt/experiments.hpp"
#include "mclt/models.hpp"

using namespace mclt;

namespace {

MomentProfile rademacher(std::size_t n) {
  return analytic_moments(Rademacher{}, n, HorizonCheck::kUnchecked);
}

double sum_terms(const BoundReport& r) {
  return std::accumulate(r.per_k_terms.begin(), r.per_k_terms.end(), 0.0) + r.tail_term;
}

}  // namespace

TEST_CASE("single-step Rademacher hand values at a = 0") {
  const auto p = rademacher(1);
  CHECK(w_bound_stein(p, 0.0).total == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(w_bound_moment(p, 0.0, 1.0).total == doctest::Approx(6.0).epsilon(1e-15));
  CHECK(w_bound_third_moment(p, 0.0).total == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(w_bound_nonstationary(p, 0.0).total == doctest::Approx(4.0).epsilon(1e-15));
  const double w = wasserstein_exact(enumerate_law(Rademacher{}, 1)).value;
  CHECK(w_bound_stein(p, 0.0).total >= w);
}

TEST_CASE("truncated Kolmogorov functional, Rademacher n = 4, a = 1") {
  const auto r = k_bound_truncated(rademacher(4), 1.0);
  const double expected =
      std::pow(4.0, -1.5) + std::pow(3.0, -1.5) + std::pow(2.0, -1.5) + 1.0 + 0.5;
  CHECK(r.total == doctest::Approx(expected).epsilon(1e-14));
  CHECK(r.total == doctest::Approx(2.171003480323149).epsilon(1e-14));
  CHECK(r.tail_term == 0.5);
  CHECK_FALSE(r.explicit_constants);
  // Using tau_{n,k} instead would give sum (6-k)^{-3/2} + 1/2.
  const double shifted = std::pow(5.0, -1.5) + std::pow(4.0, -1.5) + std::pow(3.0, -1.5) +
                         std::pow(2.0, -1.5) + 0.5;
  CHECK(std::abs(r.total - shifted) > 0.1);
}

TEST_CASE("nonstationary bound truncates at tau_{n,k}") {
  // n = 4, a = 1: tau_k^2 = 6 - k > 1, so every term is (3 + 2) / (6 - k).
  const auto r = w_bound_nonstationary(rademacher(4), 1.0);
  const double expected = 0.5 * 5.0 * (1.0 / 5 + 1.0 / 4 + 1.0 / 3 + 1.0 / 2) + 1.0;
  CHECK(r.total == doctest::Approx(expected).epsilon(1e-14));
  const double shifted = 0.5 * 5.0 * (1.0 / 4 + 1.0 / 3 + 1.0 / 2 + 1.0) + 1.0;
  CHECK(std::abs(r.total - shifted) > 1.0);
}

TEST_CASE("conditional Kolmogorov functional on Rademacher") {
  const auto r = k_bound_conditional(rademacher(4), 1.0);
  const double expected = 0.5 * (1.0 / 4 + 1.0 / 3 + 1.0 / 2 + 1.0) + 0.5;
  CHECK(r.total == doctest::Approx(expected).epsilon(1e-14));
  REQUIRE(r.hypothesis_sum.has_value());
  CHECK(*r.hypothesis_sum > 0.0);
  // Independent steps: conditional sups are the unconditional moments.
  CHECK_NOTHROW(k_bound_conditional(analytic_moments(HeavyTail{}, 16), 2.0));
  const auto bpre = estimate_moments(BpreDifference{}, 16, 200, 3);
  CHECK_THROWS_AS(k_bound_conditional(bpre, 2.0), Unsupported);
}

TEST_CASE("hypothesis sum at a = sqrt(s_n) on Rademacher") {
  // Falls below 1/2 only from n = 64 on; at n = 16 it is about 0.61.
  std::vector<double> sums;
  for (std::size_t n : {16, 64, 256, 1024}) {
    const auto p = analytic_moments(Rademacher{}, n);
    sums.push_back(*k_bound_conditional(p, std::sqrt(p.s_n())).hypothesis_sum);
  }
  CHECK(sums[0] == doctest::Approx(0.6135).epsilon(1e-3));
  CHECK(sums[1] == doctest::Approx(0.4934).epsilon(1e-3));
  CHECK(sums[1] < 0.5);
  for (std::size_t i = 1; i < sums.size(); ++i) CHECK(sums[i] < sums[i - 1]);
}

TEST_CASE("Gaussian steps reduce to normal tail closed forms") {
  const auto p = analytic_moments(IidGaussian{}, 4);
  const auto r = k_bound_truncated(p, 1.0);
  double expected = 0.5;
  for (int k = 1; k <= 4; ++k) {
    const double t = std::sqrt(5.0 - k);
    const double phi = std::exp(-t * t / 2) / std::sqrt(2 * M_PI);
    const double third_below = std::sqrt(2 / M_PI) * (2 - (t * t + 2) * std::exp(-t * t / 2));
    const double second_above = 2 * (t * phi + 0.5 * std::erfc(t / std::sqrt(2.0)));
    expected += third_below / (t * t * t) + second_above / (t * t);
  }
  CHECK(r.total == doctest::Approx(expected).epsilon(1e-12));

  const auto p256 = analytic_moments(IidGaussian{}, 256);
  const auto third = w_bound_third_moment(p256, 1.0);
  double sum = 0.0;
  for (int k = 1; k <= 256; ++k) sum += 2 * std::sqrt(2 / M_PI) / (256.0 - k + 1 + 1.0);
  CHECK(third.total == doctest::Approx(3.0 / 16 * sum + 2.0 / 16).epsilon(1e-12));
}

TEST_CASE("decay model nonstationary bound from two-point closed forms") {
  const std::size_t n = 16;
  const auto r = w_bound_nonstationary(analytic_moments(VarianceDecay{0.5, 0.5}, n), 1.0);
  double expected = 2.0 / 4;
  for (std::size_t k = 1; k <= n; ++k) {
    const double ck = 0.5 / std::sqrt(double(k));
    const double hi = std::sqrt(1 + ck), lo = std::sqrt(1 - ck);
    const double tau = std::sqrt(double(n - k + 1) + 1.0);
    const double abs1 = (hi + lo) / 2, abs3 = (hi * hi * hi + lo * lo * lo) / 2;
    expected += ((ck + 0.0) / tau + (3 * abs1 + 2 * abs3) / (tau * tau)) / 4;
  }
  CHECK(r.total == doctest::Approx(expected).epsilon(1e-12));
  // c = 0 is Rademacher.
  CHECK(w_bound_nonstationary(analytic_moments(VarianceDecay{0.5, 0.0}, n), 1.0).total ==
        doctest::Approx(w_bound_nonstationary(analytic_moments(Rademacher{}, n), 1.0).total)
            .epsilon(1e-14));
}

TEST_CASE("totals are the sum of their parts and grow with a") {
  const auto p = analytic_moments(HeavyTail{1.0, 0.05}, 64);
  for (auto id : {BoundId::kKTruncated, BoundId::kWStein, BoundId::kWMoment,
                  BoundId::kWThirdMoment, BoundId::kWNonstationary}) {
    for (double a : {1.0, 3.0, 8.0}) {
      const auto r = evaluate_bound(id, p, a);
      CHECK(r.per_k_terms.size() == 64);
      CHECK(std::abs(r.total - sum_terms(r)) <= 1e-12);
      CHECK(r.total >= 0.0);
      CHECK(std::isfinite(r.total));
    }
    CHECK(evaluate_bound(id, p, 1e4).total > evaluate_bound(id, p, 100.0).total);
  }
  CHECK(k_bound_truncated(p, p.s_n()).tail_term == doctest::Approx(1.0));
  CHECK(k_bound_truncated(p, p.s_n()).total >= 1.0);
}

TEST_CASE("third-moment and moment(delta = 1) sums coincide up to 3 versus 6") {
  for (std::size_t n : {4, 100, 1024}) {
    const auto p = analytic_moments(Rademacher{}, n);
    const double a = std::sqrt(p.s_n());
    const auto third = w_bound_third_moment(p, a);
    const auto moment = w_bound_moment(p, a, 1.0);
    for (std::size_t k = 0; k < n; ++k)
      CHECK(moment.per_k_terms[k] == doctest::Approx(2 * third.per_k_terms[k]).epsilon(1e-14));
    CHECK(moment.tail_term == third.tail_term);
  }
}

TEST_CASE("heavy-tail moment bound is finite from the Pareto closed form") {
  const auto p = analytic_moments(HeavyTail{0.5, 0.05}, 64);
  const auto r = w_bound_moment(p, std::pow(p.s_n(), 1 / 1.5), 0.5);
  CHECK(std::isfinite(r.total));
  CHECK(r.total > 0.0);
  CHECK(r.explicit_constants);
  CHECK(w_bound_moment(p, 1e6, 0.5).total > 1e4);
}

TEST_CASE("preconditions") {
  const auto rad = analytic_moments(Rademacher{}, 16);
  CHECK_THROWS_AS(k_bound_truncated(rad, 0.5), PreconditionError);
  CHECK_THROWS_AS(k_bound_conditional(rad, 0.0), PreconditionError);
  CHECK_THROWS_AS(w_bound_moment(rad, 1.0, 1.5), PreconditionError);
  CHECK_THROWS_AS(w_bound_moment(rad, 1.0, 0.0), PreconditionError);
  const auto decay = analytic_moments(VarianceDecay{0.5, 0.5}, 16);
  CHECK_THROWS_AS(w_bound_stein(decay, 1.0), PreconditionError);
  CHECK_THROWS_AS(w_bound_moment(decay, 1.0, 1.0), PreconditionError);
  CHECK_THROWS_AS(w_bound_third_moment(decay, 1.0), PreconditionError);
  CHECK_NOTHROW(w_bound_nonstationary(decay, 1.0));
  CHECK_NOTHROW(k_bound_conditional(decay, 2.0));
  const auto heavy = analytic_moments(HeavyTail{0.5, 0.05}, 16);
  CHECK_THROWS_AS(w_bound_third_moment(heavy, 1.0), PreconditionError);
  CHECK_THROWS_AS(check_admissible(BoundId::kWThirdMoment, heavy), PreconditionError);
  CHECK_NOTHROW(check_admissible(BoundId::kKConditional, heavy));
  CHECK_NOTHROW(check_admissible(BoundId::kWMoment, heavy));
  CHECK_THROWS_AS(w_bound_stein(rad, -1.0), InvalidInput);
}

TEST_CASE("bound id names round-trip") {
  for (auto id : {BoundId::kKTruncated, BoundId::kKConditional, BoundId::kWStein,
                  BoundId::kWMoment, BoundId::kWThirdMoment, BoundId::kWNonstationary})
    CHECK(parse_bound_id(to_string(id)) == id);
  CHECK(to_string(BoundId::kWThirdMoment) == "W_THIRD_MOMENT");
  CHECK(parse_bound_id("w_stein") == BoundId::kWStein);
  CHECK_THROWS_AS(parse_bound_id("W_FOO"), InvalidInput);
  CHECK(explicit_constants(BoundId::kWStein));
  CHECK_FALSE(explicit_constants(BoundId::kKTruncated));
}

TEST_CASE("optimize_a") {
  SUBCASE("convex surrogate") {
    const BoundEvaluator f = [](double a) {
      BoundReport r;
      r.a_used = a;
      r.total = 1 / a + a / 100;
      return r;
    };
    const auto best = optimize_a(f, 0.01, 100.0);
    CHECK(best.a_used == doctest::Approx(10.0).epsilon(1e-4));
    CHECK(best.total == doctest::Approx(0.2).epsilon(1e-8));
    CHECK(optimize_a(f, 3.0, 3.0).a_used == 3.0);
    CHECK_THROWS_AS(optimize_a(f, 5.0, 3.0), InvalidInput);
  }
  SUBCASE("moment bound on Rademacher picks a near sqrt(s_n)") {
    const auto p = analytic_moments(Rademacher{}, 1024);
    const auto [lo, hi] = default_a_range(p);
    CHECK(lo == doctest::Approx(32.0 / 1e4));
    CHECK(hi == doctest::Approx(32.0));
    const double analytic = std::sqrt(p.s_n());
    const auto best = optimize_a([&](double a) { return w_bound_moment(p, a, 1.0); }, lo, hi,
                                 analytic);
    CHECK(best.a_used >= analytic / 2);
    CHECK(best.a_used <= analytic * 2);
    CHECK(best.total <= w_bound_moment(p, lo, 1.0).total);
    CHECK(best.total <= w_bound_moment(p, hi, 1.0).total);
    CHECK(best.total <= w_bound_moment(p, analytic, 1.0).total);
  }
}

TEST_CASE("optimized Stein bound decays like ln n / sqrt n") {
  // On Rademacher the optimum is near a = 4 and the total is close to
  // (4 ln(n / 16) + 8) / sqrt(n): the raw log-log slope over this range is
  // about -0.32, and dividing out ln n gives about -0.47.
  std::vector<std::pair<double, double>> points;
  for (std::size_t n = 32; n <= 8192; n *= 2) {
    const auto p = analytic_moments(Rademacher{}, n);
    const auto [lo, hi] = default_a_range(p);
    const auto best = optimize_a([&](double a) { return w_bound_stein(p, a); }, lo, hi);
    points.emplace_back(double(n), best.total);
  }
  const auto corrected = fit_rate(points, RateCorrection::kLog);
  CHECK(corrected.slope >= -0.60);
  CHECK(corrected.slope <= -0.40);
  const auto raw = fit_rate(points, RateCorrection::kNone);
  CHECK(raw.slope >= -0.36);
  CHECK(raw.slope <= -0.28);
}

TEST_CASE("explicit bounds dominate exact W for small Rademacher sums") {
  for (std::size_t n = 2; n <= 12; ++n) {
    const auto p = analytic_moments(Rademacher{}, n);
    const double w = wasserstein_exact(enumerate_law(Rademacher{}, n)).value;
    const auto [lo, hi] = default_a_range(p);
    for (auto id : {BoundId::kWStein, BoundId::kWMoment, BoundId::kWThirdMoment,
                    BoundId::kWNonstationary}) {
      const auto best = optimize_a([&](double a) { return evaluate_bound(id, p, a, 1.0); }, lo, hi);
      CHECK(best.total >= w);
    }
  }
}

TEST_CASE("Monte-Carlo profiles carry a moment error") {
  const auto p = estimate_moments(HeavyTail{1.0, 0.05}, 32, 2000, 11);
  const auto r = w_bound_stein(p, 2.0);
  CHECK(r.moment_error > 0.0);
  const auto exact = w_bound_stein(analytic_moments(HeavyTail{1.0, 0.05}, 32), 2.0);
  CHECK(std::abs(r.total - exact.total) <= 4 * r.moment_error);
  CHECK(analytic_moments(HeavyTail{1.0, 0.05}, 32).provider() == Provider::kAnalytic);
  CHECK(exact.moment_error == 0.0);
}
