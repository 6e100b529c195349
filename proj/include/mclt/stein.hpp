#pragma once

// Bounded solution of g'(x) - x g(x) = f(x) - E f(N) on a fixed grid, and
// checks of the sup-norm bounds on g, g', g''.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace mclt {

/// A Lipschitz test function. `kinks` lists points where f' may jump; the
/// quadrature splits cells there. `derivative`, when present, replaces a
/// finite-difference f' inside cells.
struct TestFunction {
  std::function<double(double)> value;
  std::vector<double> kinks;
  std::function<double(double)> derivative;
};

struct SteinGrid {
  double half_width = 8.0;   ///< solution reported on [-half_width, half_width]
  int points_per_unit = 512;
  double tail_cutoff = 40.0;  ///< quadrature runs over [-tail_cutoff, tail_cutoff]
};

struct SteinSolution {
  std::vector<double> grid;
  std::vector<double> g_values;
  std::vector<double> g_prime_values;
  double f_mean = 0.0;          ///< E f(N), composite Gauss-Legendre
  double f_mean_hermite = 0.0;  ///< E f(N), 128-node Gauss-Hermite
  double max_residual = 0.0;    ///< max |g' - x g - (f - f_mean)| over interior points
  double zero_mismatch = 0.0;   ///< |lower-tail g(0) - upper-tail g(0)|

  /// First-order tail asymptotic -(f(x) - f_mean) / x outside the grid.
  double tail_approximation(const TestFunction& f, double x) const;
};

/// Throws InvalidInput when f is non-finite somewhere on the quadrature
/// nodes or the grid is malformed.
SteinSolution stein_solve(const TestFunction& f, const SteinGrid& grid = {});

struct SteinBoundReport {
  double sup_g = 0.0;
  double sup_g_prime = 0.0;
  double sup_g_second = 0.0;  ///< central differences of g'
  double limit_g = 0.0;
  double limit_g_prime = 0.0;
  double limit_g_second = 0.0;
  bool g_ok = false;
  bool g_prime_ok = false;
  bool g_second_ok = false;

  bool passes() const { return g_ok && g_prime_ok && g_second_ok; }
};

/// Grid suprema against 2L, sqrt(2/pi) L and 2L, L the Lipschitz constant
/// of f. g'' gets a 1e-4 allowance for the finite difference.
SteinBoundReport stein_bound_check(const SteinSolution& sol, double lipschitz);

struct ScaledFamilyReport {
  double s = 0.0;
  double t = 1.0;
  double h_mean = 0.0;         ///< E h(tN + s) by adaptive quadrature
  double max_identity_error = 0.0;
  double sup_f = 0.0;          ///< sup |f_{s,t}|
  double sup_f_prime = 0.0;
  double sup_f_second = 0.0;
  bool identity_ok = false;    ///< max_identity_error <= 1e-5
  bool bounds_ok = false;      ///< 2L, L / t, 2L / t^2

  bool passes() const { return identity_ok && bounds_ok; }
};

/// f_{s,t}(w) = g((w - s) / t) with g solving the Stein equation for
/// h(t x + s) / t; checks t^2 f' - (w - s) f = h(w) - E h(tN + s).
/// Throws InvalidInput for t <= 0.
ScaledFamilyReport scaled_family_check(const TestFunction& h, double s, double t,
                                       double lipschitz, const SteinGrid& grid = {});

/// Seeded piecewise-linear function with slopes in [-1, 1] and 3..8 kinks in
/// [-6, 6].
TestFunction random_lipschitz_function(std::uint64_t seed, std::uint64_t index);

/// Gauss-Hermite rule for the standard normal weight (nodes, weights).
std::pair<std::vector<double>, std::vector<double>> gauss_hermite_normal(int nodes);

}  // namespace mclt
