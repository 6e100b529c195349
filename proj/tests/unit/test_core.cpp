#include <cmath>
#include <memory>

#include "doctest.h"
#include "mclt/core.hpp"
#include "mclt/errors.hpp"
#include "mclt/models.hpp"

using namespace mclt;

namespace {

// Variances given step by step; other functionals unused here.
class FixedVariances final : public MomentSource {
 public:
  explicit FixedVariances(std::vector<double> v) : v_(std::move(v)) {}
  Provider provider() const override { return Provider::kAnalytic; }
  bool deterministic_variance() const override { return true; }
  MomentValue variance(std::size_t i) const override { return {v_.at(i), 0.0}; }
  MomentValue truncated(std::size_t, int, double, Cut) const override { return {}; }
  MomentValue absolute(std::size_t, double) const override { return {}; }
  MomentValue variance_deviation(std::size_t) const override { return {}; }

 private:
  std::vector<double> v_;
};

MomentProfile fixed(std::vector<double> v, HorizonCheck check = HorizonCheck::kStanding) {
  const auto n = v.size();
  return MomentProfile(n, std::make_shared<FixedVariances>(std::move(v)), std::nullopt, check);
}

}  // namespace

TEST_CASE("difference path partial sums and validation") {
  DifferencePath p({1.0, -2.0, 0.5}, {1.0, 1.0, 1.0});
  CHECK(p.n() == 3);
  CHECK(p.partial_sums()[0] == 1.0);
  CHECK(p.partial_sums()[1] == -1.0);
  CHECK(p.endpoint() == -0.5);
  CHECK(p.total_conditional_variance() == 3.0);
  CHECK_THROWS_AS(DifferencePath({}, {}), InvalidInput);
  CHECK_THROWS_AS(DifferencePath({1.0}, {1.0, 2.0}), InvalidInput);
  CHECK_THROWS_AS(DifferencePath({1.0}, {-0.1}), InvalidInput);
}

TEST_CASE("partial sums are reproduced bit for bit by forward summation") {
  const auto path = generate_path(HeavyTail{}, 500, 3);
  double s = 0.0;
  for (std::size_t i = 0; i < path.n(); ++i) {
    s += path.differences()[i];
    CHECK(path.partial_sums()[i] == s);
  }
}

TEST_CASE("unit-variance ledger at n = 4, a = 1") {
  const auto ledger = build_scale_ledger(fixed({1, 1, 1, 1}), 1.0);
  CHECK(ledger.tau(1) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  CHECK(ledger.tau(5) == 1.0);
  CHECK(ledger.rho_bar(1) == 2.0);
  CHECK(ledger.rho_bar(5) == 0.0);
  for (std::size_t k = 1; k <= 5; ++k) {
    CHECK(ledger.tau_sq(k) == ledger.rho_bar_sq(k) + 1.0);
    CHECK(ledger.tau(k) >= 1.0);
    CHECK(ledger.tau(k) >= ledger.rho_bar(k));
    if (k > 1) CHECK(ledger.tau(k) <= ledger.tau(k - 1));
  }
}

TEST_CASE("ledger with unequal variances") {
  const auto ledger = build_scale_ledger(fixed({1, 3}), 2.0);
  CHECK(ledger.tau_sq(1) == 8.0);
  CHECK(ledger.tau_sq(2) == 7.0);
  CHECK(ledger.tau(3) == 2.0);
}

TEST_CASE("a = 0 makes tau equal rho_bar") {
  const auto ledger = build_scale_ledger(fixed({0.5, 2, 1.5, 1}), 0.0);
  for (std::size_t k = 1; k <= 5; ++k) CHECK(ledger.tau(k) == ledger.rho_bar(k));
  CHECK_THROWS_AS(build_scale_ledger(fixed({1, 1}), -1.0), InvalidInput);
}

TEST_CASE("profile enforces s_n^2 >= 2 unless unchecked") {
  CHECK_THROWS_AS(fixed({1.0}), InvalidInput);
  CHECK_NOTHROW(fixed({1.0}, HorizonCheck::kUnchecked));
  CHECK_THROWS_AS(fixed({1.0, 0.0}), InvalidInput);
  CHECK(fixed({1, 1, 1}).cumulative()[2] == 3.0);
  CHECK(fixed({1, 1, 2}).s_n() == 2.0);
}

TEST_CASE("per-path scales") {
  SUBCASE("unit variances, a = 0") {
    DifferencePath p({1, -1, 1}, {1, 1, 1});
    const auto l = per_path_scales(p, 0.0);
    CHECK(l.upsilon(1) == std::sqrt(3.0));
    CHECK(l.upsilon(2) == std::sqrt(2.0));
    CHECK(l.upsilon(3) == 1.0);
    CHECK(l.upsilon(4) == 0.0);
  }
  SUBCASE("random variances, a = 1") {
    DifferencePath p({0.1, 0.2}, {0.5, 1.5});
    const auto l = per_path_scales(p, 1.0);
    CHECK(l.upsilon_sq(1) == 3.0);
    CHECK(l.upsilon_sq(2) == 2.5);
    CHECK(l.upsilon(3) == 1.0);
    CHECK(l.rho_sq(1) == 2.0);
  }
  SUBCASE("deterministic-variance paths match the profile ledger") {
    const auto path = generate_path(Rademacher{}, 6, 11);
    const auto l = per_path_scales(path, analytic_moments(Rademacher{}, 6), 0.7);
    for (std::size_t k = 1; k <= 7; ++k) {
      CHECK(l.upsilon(k) == l.tau(k));
      CHECK(l.rho(k) == l.rho_bar(k));
    }
    CHECK(l.has_path_scales());
    CHECK(l.has_profile_scales());
  }
}

TEST_CASE("cut sides") {
  CHECK(keeps(Cut::kBelow, 1.0, 2.0));
  CHECK_FALSE(keeps(Cut::kBelow, 2.0, 2.0));
  CHECK(keeps(Cut::kAtOrBelow, 2.0, 2.0));
  CHECK_FALSE(keeps(Cut::kAbove, 2.0, 2.0));
  CHECK(keeps(Cut::kAtOrAbove, 2.0, 2.0));
}
