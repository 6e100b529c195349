#include <cmath>
#include <map>

#include "doctest.h"
#include "mclt/distances.hpp"
#include "mclt/errors.hpp"
#include "mclt/normal.hpp"

using namespace mclt;

namespace {

double Phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Exact law by listing every sign sequence (e_0, e_1, ..., e_n).
DiscreteDistribution brute_force_law(double alpha, double c, int n) {
  std::map<double, double> atoms;
  const long paths = 1L << (n + 1);
  for (long bits = 0; bits < paths; ++bits) {
    double s = 0.0;
    double prev = (bits & 1) ? 1.0 : -1.0;
    for (int k = 1; k <= n; ++k) {
      const double e = (bits >> k & 1) ? 1.0 : -1.0;
      s += e * std::sqrt(1.0 + c * std::pow(k, -alpha) * prev);
      prev = e;
    }
    atoms[s / std::sqrt(n)] += 1.0 / paths;
  }
  DiscreteDistribution d;
  for (const auto& [x, p] : atoms) {
    if (!d.support.empty() && x - d.support.back() <= 1e-12) {
      d.probabilities.back() += p;
    } else {
      d.support.push_back(x);
      d.probabilities.push_back(p);
    }
  }
  return d;
}

// Right-continuous CDF of a discrete law.
double cdf_of(const DiscreteDistribution& d, double x) {
  double s = 0.0;
  for (std::size_t i = 0; i < d.support.size(); ++i) {
    if (d.support[i] <= x) s += d.probabilities[i];
  }
  return s;
}

}  // namespace

TEST_CASE("point mass at zero") {
  const DiscreteDistribution d{{0.0}, {1.0}};
  CHECK(kolmogorov_exact(d).value == 0.5);
  CHECK(wasserstein_exact(d).value == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-15));
}

TEST_CASE("Rademacher law") {
  const DiscreteDistribution d{{-1.0, 1.0}, {0.5, 0.5}};
  CHECK(kolmogorov_exact(d).value == doctest::Approx(Phi(1.0) - 0.5).epsilon(1e-15));
  // Riemann sum of |F - Phi| on a fine midpoint grid.
  double riemann = 0.0;
  const double h = 1e-4;
  for (double x = -12.0 + h / 2; x < 12.0; x += h) riemann += std::abs(cdf_of(d, x) - Phi(x)) * h;
  CHECK(wasserstein_exact(d).value == doctest::Approx(riemann).epsilon(1e-7));
}

TEST_CASE("three fair steps") {
  const auto law = enumerate_law(Rademacher{}, 3);
  REQUIRE(law.support.size() == 4);
  const double r3 = std::sqrt(3.0);
  CHECK(law.support[0] == doctest::Approx(-r3));
  CHECK(law.support[1] == doctest::Approx(-1.0 / r3));
  CHECK(law.probabilities[0] == 0.125);
  CHECK(law.probabilities[1] == 0.375);
  // sup over the four jump points of both one-sided gaps.
  double k = 0.0, f_prev = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    const double f = f_prev + law.probabilities[i];
    k = std::max({k, std::abs(f - Phi(law.support[i])), std::abs(f_prev - Phi(law.support[i]))});
    f_prev = f;
  }
  CHECK(kolmogorov_exact(law).value == doctest::Approx(k).epsilon(1e-15));
}

TEST_CASE("enumeration matches brute force over all sign paths") {
  for (int n : {1, 2, 5, 9}) {
    for (double c : {0.0, 0.5}) {
      const auto fast = c == 0.0 ? enumerate_law(Rademacher{}, n)
                                 : enumerate_law(VarianceDecay{0.25, c}, n);
      const auto slow = brute_force_law(0.25, c, n);
      REQUIRE(fast.support.size() == slow.support.size());
      for (std::size_t i = 0; i < fast.support.size(); ++i) {
        CHECK(fast.support[i] == doctest::Approx(slow.support[i]).epsilon(1e-12));
        CHECK(fast.probabilities[i] == doctest::Approx(slow.probabilities[i]).epsilon(1e-12));
      }
    }
  }
  const auto one = enumerate_law(Rademacher{}, 1);
  CHECK(one.support == std::vector<double>{-1.0, 1.0});
  CHECK(one.probabilities == std::vector<double>{0.5, 0.5});
  const auto dec = enumerate_law(VarianceDecay{0.5, 0.0}, 3);
  CHECK(dec.support == enumerate_law(Rademacher{}, 3).support);
  CHECK_THROWS_AS(enumerate_law(IidGaussian{}, 3), Unsupported);
  CHECK_THROWS_AS(enumerate_law(Rademacher{}, 21), InvalidInput);
  CHECK_THROWS_AS(enumerate_law(Rademacher{}, 0), InvalidInput);
}

TEST_CASE("closed-form W agrees with adaptive quadrature") {
  for (int n = 1; n <= 12; ++n) {
    const auto law = enumerate_law(Rademacher{}, n);
    CHECK(std::abs(wasserstein_exact(law).value - wasserstein_quadrature(law)) <= 1e-8);
  }
  const auto law = enumerate_law(VarianceDecay{0.75, 0.5}, 8);
  CHECK(std::abs(wasserstein_exact(law).value - wasserstein_quadrature(law)) <= 1e-8);
  const DiscreteDistribution shifted{{2.0, 3.0, 7.5}, {0.2, 0.3, 0.5}};
  CHECK(std::abs(wasserstein_exact(shifted).value - wasserstein_quadrature(shifted)) <= 1e-8);
  const DiscreteDistribution left{{-9.0, -4.0}, {0.6, 0.4}};
  CHECK(std::abs(wasserstein_exact(left).value - wasserstein_quadrature(left)) <= 1e-8);
}

TEST_CASE("normal quantile grid") {
  const std::size_t m = 1000;
  std::vector<double> grid(m);
  for (std::size_t i = 0; i < m; ++i) grid[i] = normal::quantile((i + 0.5) / m);
  const auto d = distances_from_sample(grid, 1);
  CHECK(d.kolmogorov.value == doctest::Approx(0.5 / m).epsilon(1e-10));
  CHECK(d.wasserstein.value < 0.005);
  CHECK(d.kolmogorov.std_error == doctest::Approx(std::sqrt(std::log(40.0) / (2.0 * m))));
}

TEST_CASE("Gaussian sums are normal") {
  const auto d = estimate_distances_mc(IidGaussian{}, 16, 20000, 3);
  CHECK(d.kolmogorov.value <= d.kolmogorov.std_error);
  CHECK(d.wasserstein.value <= 3.0 * d.wasserstein.std_error);
  CHECK(d.wasserstein.method == DistanceMethod::kEmpiricalExactIntegral);
  CHECK_THROWS_AS(estimate_distances_mc(IidGaussian{}, 16, 999, 3), InvalidInput);
}

TEST_CASE("Monte-Carlo distances match enumeration at n = 10") {
  const auto law = enumerate_law(Rademacher{}, 10);
  const auto d = estimate_distances_mc(Rademacher{}, 10, 100000, 17);
  CHECK(std::abs(d.kolmogorov.value - kolmogorov_exact(law).value) <= 3 * d.kolmogorov.std_error);
  CHECK(std::abs(d.wasserstein.value - wasserstein_exact(law).value) <=
        3 * d.wasserstein.std_error);
}

TEST_CASE("Monte-Carlo estimates do not depend on the thread count") {
  const auto a = estimate_distances_mc(HeavyTail{}, 32, 3000, 8, 1);
  const auto b = estimate_distances_mc(HeavyTail{}, 32, 3000, 8, 3);
  CHECK(a.kolmogorov.value == b.kolmogorov.value);
  CHECK(a.wasserstein.value == b.wasserstein.value);
  CHECK(a.wasserstein.std_error == b.wasserstein.std_error);
}

TEST_CASE("distribution validation") {
  CHECK_THROWS_AS(kolmogorov_exact({{}, {}}), InvalidInput);
  CHECK_THROWS_AS(kolmogorov_exact({{1.0, 0.0}, {0.5, 0.5}}), InvalidInput);
  CHECK_THROWS_AS(kolmogorov_exact({{0.0, 1.0}, {0.5, 0.6}}), InvalidInput);
  CHECK_THROWS_AS(kolmogorov_exact({{0.0, 1.0}, {1.0, 0.0}}), InvalidInput);
  const auto e = empirical_distribution({3.0, 1.0, 3.0, 2.0});
  CHECK(e.support == std::vector<double>{1.0, 2.0, 3.0});
  CHECK(e.probabilities == std::vector<double>{0.25, 0.25, 0.5});
}

TEST_CASE("K-W relation") {
  const DistanceEstimate zero{};
  const auto z = kw_relation_check(zero, zero);
  CHECK(z.holds);
  CHECK(z.slack == 0.0);
  CHECK(kKwConstant == doctest::Approx(std::pow(2.0 / M_PI, 0.25)).epsilon(1e-15));
  for (int n = 1; n <= 14; ++n) {
    const auto law = enumerate_law(Rademacher{}, n);
    CHECK(kw_relation_check(kolmogorov_exact(law), wasserstein_exact(law)).holds);
  }
  for (int n = 1; n <= 10; ++n) {
    const auto law = enumerate_law(VarianceDecay{0.25, 0.5}, n);
    CHECK(kw_relation_check(kolmogorov_exact(law), wasserstein_exact(law)).holds);
  }
  const DistanceEstimate big_k{0.5, 0.0}, small_w{0.01, 0.0};
  CHECK_FALSE(kw_relation_check(big_k, small_w).holds);
}
