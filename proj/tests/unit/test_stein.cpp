#include <cmath>

#include "doctest.h"
#include "mclt/errors.hpp"
#include "mclt/stein.hpp"

using namespace mclt;

namespace {

TestFunction identity_fn() { return {[](double x) { return x; }, {}, [](double) { return 1.0; }}; }
TestFunction abs_fn() { return {[](double x) { return std::abs(x); }, {0.0}, {}}; }

// RK4 for g' = x g + (f - mean), started from the tail asymptotic -(f - mean)/x
// at -8 (forward) and +8 (backward); the homogeneous part decays inward.
std::vector<double> rk4_solution(const TestFunction& f, double mean, const std::vector<double>& grid) {
  const double h = grid[1] - grid[0];
  auto rhs = [&](double x, double g) { return x * g + f.value(x) - mean; };
  std::vector<double> g(grid.size());
  const std::size_t mid = grid.size() / 2;  // grid[mid] == 0
  g[0] = -(f.value(grid[0]) - mean) / grid[0];
  for (std::size_t j = 0; j < mid; ++j) {
    const double x = grid[j];
    const double k1 = rhs(x, g[j]);
    const double k2 = rhs(x + h / 2, g[j] + h / 2 * k1);
    const double k3 = rhs(x + h / 2, g[j] + h / 2 * k2);
    const double k4 = rhs(x + h, g[j] + h * k3);
    g[j + 1] = g[j] + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  const std::size_t last = grid.size() - 1;
  g[last] = -(f.value(grid[last]) - mean) / grid[last];
  for (std::size_t j = last; j > mid + 1; --j) {
    const double x = grid[j];
    const double k1 = rhs(x, g[j]);
    const double k2 = rhs(x - h / 2, g[j] - h / 2 * k1);
    const double k3 = rhs(x - h / 2, g[j] - h / 2 * k2);
    const double k4 = rhs(x - h, g[j] - h * k3);
    g[j - 1] = g[j] - h / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
  }
  return g;
}

}  // namespace

TEST_CASE("identity test function has the constant solution -1") {
  const auto sol = stein_solve(identity_fn());
  CHECK(std::abs(sol.f_mean) < 1e-14);
  for (std::size_t j = 0; j < sol.grid.size(); ++j) {
    CHECK(sol.g_values[j] == doctest::Approx(-1.0).epsilon(1e-9));
    CHECK(std::abs(sol.g_prime_values[j]) < 1e-8);
  }
  const auto b = stein_bound_check(sol, 1.0);
  CHECK(b.sup_g == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(b.sup_g_prime < 1e-8);
  CHECK(b.passes());
}

TEST_CASE("constant test function has g = 0") {
  const auto sol = stein_solve({[](double) { return 3.5; }, {}, {}});
  CHECK(sol.f_mean == doctest::Approx(3.5).epsilon(1e-14));
  for (double g : sol.g_values) CHECK(std::abs(g) < 1e-9);
}

TEST_CASE("absolute value against an RK4 oracle") {
  const auto f = abs_fn();
  const auto sol = stein_solve(f);
  CHECK(sol.f_mean == doctest::Approx(std::sqrt(2.0 / M_PI)).epsilon(1e-13));
  CHECK(sol.max_residual <= 1e-6);
  CHECK(sol.zero_mismatch <= 1e-8);
  CHECK(sol.grid.front() == -8.0);
  CHECK(sol.grid.back() == 8.0);
  CHECK(sol.grid[1] - sol.grid[0] == 1.0 / 512);
  const auto oracle = rk4_solution(f, std::sqrt(2.0 / M_PI), sol.grid);
  for (std::size_t j = 0; j < sol.grid.size(); ++j) {
    if (std::abs(sol.grid[j]) <= 5.0) CHECK(std::abs(sol.g_values[j] - oracle[j]) < 1e-8);
  }
  CHECK(stein_bound_check(sol, 1.0).passes());
  // Far tail: first-order asymptotic is close to the solution at the edge.
  CHECK(sol.tail_approximation(f, 8.0) == doctest::Approx(sol.g_values.back()).epsilon(2e-2));
}

TEST_CASE("Gauss-Hermite cross-check on a smooth function") {
  const auto [nodes, weights] = gauss_hermite_normal(128);
  double total = 0.0;
  for (double w : weights) total += w;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-13));
  const auto sol = stein_solve({[](double x) { return std::cos(x); }, {}, {}});
  CHECK(sol.f_mean == doctest::Approx(std::exp(-0.5)).epsilon(1e-13));
  CHECK(sol.f_mean_hermite == doctest::Approx(std::exp(-0.5)).epsilon(1e-13));
  CHECK(sol.max_residual <= 1e-6);
  CHECK(stein_bound_check(sol, 1.0).passes());
}

TEST_CASE("seeded random Lipschitz family satisfies all three bounds") {
  for (std::uint64_t i = 0; i < 20; ++i) {
    const auto f = random_lipschitz_function(2024, i);
    const auto sol = stein_solve(f);
    CHECK(sol.max_residual <= 1e-6);
    CHECK(sol.zero_mismatch <= 1e-8);
    const auto b = stein_bound_check(sol, 1.0);
    CHECK(b.g_ok);
    CHECK(b.g_prime_ok);
    CHECK(b.g_second_ok);
  }
  // Same seed and index give the same function.
  const auto a = random_lipschitz_function(5, 3), b = random_lipschitz_function(5, 3);
  CHECK(a.kinks == b.kinks);
  CHECK(a.value(0.37) == b.value(0.37));
}

TEST_CASE("scaled family") {
  SUBCASE("s = 0, t = 1 reduces to the plain bounds") {
    const auto r = scaled_family_check(abs_fn(), 0.0, 1.0, 1.0);
    const auto b = stein_bound_check(stein_solve(abs_fn()), 1.0);
    CHECK(r.sup_f == doctest::Approx(b.sup_g));
    CHECK(r.passes());
  }
  SUBCASE("odd h with t = 2") {
    const auto r = scaled_family_check(identity_fn(), 0.0, 2.0, 1.0);
    CHECK(std::abs(r.h_mean) < 1e-14);
    CHECK(r.identity_ok);
    CHECK(r.bounds_ok);
  }
  SUBCASE("absolute value with s = 1, t = 0.5") {
    const auto r = scaled_family_check(abs_fn(), 1.0, 0.5, 1.0);
    CHECK(r.max_identity_error <= 1e-5);
    CHECK(r.passes());
  }
  CHECK_THROWS_AS(scaled_family_check(abs_fn(), 0.0, 0.0, 1.0), InvalidInput);
  CHECK_THROWS_AS(scaled_family_check(abs_fn(), 0.0, -1.0, 1.0), InvalidInput);
}

TEST_CASE("non-finite test functions are rejected") {
  CHECK_THROWS_AS(stein_solve({[](double x) { return x > 1.0 ? NAN : 0.0; }, {}, {}}),
                  InvalidInput);
}
