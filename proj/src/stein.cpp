#include "mclt/stein.hpp"

#include <algorithm>
#include <array>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <limits>

#include "mclt/errors.hpp"
#include "mclt/normal.hpp"
#include "mclt/rng.hpp"

namespace mclt {

namespace {

// 8-point Gauss-Legendre on [-1, 1].
constexpr std::array<double, 4> kGlNodes = {0.1834346424956498, 0.5255324099163290,
                                            0.7966664774136267, 0.9602898564975363};
constexpr std::array<double, 4> kGlWeights = {0.3626837833783620, 0.3137066458778873,
                                              0.2223810344533745, 0.1012285362903763};
constexpr double kTailSpacing = 1.0 / 64.0;
constexpr double kSecondAllowance = 1e-4;

// Per-cell integrals of phi, t phi, phi f, t phi f and phi f'.
struct CellSums {
  double phi = 0.0, t_phi = 0.0, phi_f = 0.0, t_phi_f = 0.0, phi_df = 0.0;
};

double derivative_at(const TestFunction& f, double x, double lo, double hi) {
  if (f.derivative) return f.derivative(x);
  const double h = std::min(1e-5, 0.45 * std::min(x - lo, hi - x));
  return (f.value(x + h) - f.value(x - h)) / (2.0 * h);
}

CellSums integrate_cell(const TestFunction& f, double u, double v) {
  CellSums c;
  const double mid = 0.5 * (u + v), half = 0.5 * (v - u);
  for (std::size_t i = 0; i < kGlNodes.size(); ++i) {
    for (double sgn : {-1.0, 1.0}) {
      const double t = mid + sgn * half * kGlNodes[i];
      const double w = half * kGlWeights[i] * normal::pdf(t);
      const double ft = f.value(t);
      if (!std::isfinite(ft)) throw InvalidInput("test function is not finite");
      const double dft = derivative_at(f, t, u, v);
      c.phi += w;
      c.t_phi += w * t;
      c.phi_f += w * ft;
      c.t_phi_f += w * t * ft;
      c.phi_df += w * dft;
    }
  }
  return c;
}

double sup_abs(const std::vector<double>& v, std::size_t from, std::size_t to) {
  double s = 0.0;
  for (std::size_t i = from; i < to; ++i) s = std::max(s, std::abs(v[i]));
  return s;
}

std::vector<double> central_differences(const std::vector<double>& v, double h) {
  std::vector<double> d(v.size(), 0.0);
  for (std::size_t i = 1; i + 1 < v.size(); ++i) d[i] = (v[i + 1] - v[i - 1]) / (2.0 * h);
  return d;
}

}  // namespace

double SteinSolution::tail_approximation(const TestFunction& f, double x) const {
  return -(f.value(x) - f_mean) / x;
}

std::pair<std::vector<double>, std::vector<double>> gauss_hermite_normal(int nodes) {
  if (nodes < 2) throw InvalidInput("Gauss-Hermite needs at least 2 nodes");
  const int n = nodes;
  std::vector<double> x(n), w(n);
  const double pim4 = 0.7511255444649425;  // pi^(-1/4)
  double z = 0.0, pp = 0.0;
  for (int i = 1; i <= (n + 1) / 2; ++i) {
    if (i == 1) {
      z = std::sqrt(2.0 * n + 1.0) - 1.85575 * std::pow(2.0 * n + 1.0, -0.16667);
    } else if (i == 2) {
      z -= 1.14 * std::pow(static_cast<double>(n), 0.426) / z;
    } else if (i == 3) {
      z = 1.86 * z - 0.86 * x[0];
    } else if (i == 4) {
      z = 1.91 * z - 0.91 * x[1];
    } else {
      z = 2.0 * z - x[i - 3];
    }
    for (int it = 0; it < 100; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt((j - 1.0) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) <= 1e-15 * std::max(1.0, std::abs(z))) break;
    }
    x[i - 1] = z;
    x[n - i] = -z;
    w[i - 1] = w[n - i] = 2.0 / (pp * pp);
  }
  // Physicists' weight exp(-x^2) to the standard normal.
  std::vector<double> nodes_out(n), weights_out(n);
  for (int i = 0; i < n; ++i) {
    nodes_out[i] = M_SQRT2 * x[n - 1 - i];
    weights_out[i] = w[n - 1 - i] / std::sqrt(M_PI);
  }
  return {nodes_out, weights_out};
}

SteinSolution stein_solve(const TestFunction& f, const SteinGrid& spec) {
  if (!f.value) throw InvalidInput("test function is empty");
  if (!(spec.half_width > 0.0) || spec.points_per_unit < 1 ||
      !(spec.tail_cutoff > spec.half_width)) {
    throw InvalidInput("malformed Stein grid");
  }
  const double h = 1.0 / spec.points_per_unit;
  const auto half_steps = static_cast<long>(std::llround(spec.half_width * spec.points_per_unit));

  // Breakpoints: tail cells, the reporting grid, and the kinks.
  std::vector<double> breaks;
  for (double t = -spec.tail_cutoff; t < -spec.half_width; t += kTailSpacing) breaks.push_back(t);
  for (long j = -half_steps; j <= half_steps; ++j) breaks.push_back(static_cast<double>(j) * h);
  for (double t = spec.half_width + kTailSpacing; t < spec.tail_cutoff; t += kTailSpacing) {
    breaks.push_back(t);
  }
  breaks.push_back(spec.tail_cutoff);
  for (double k : f.kinks) {
    if (std::abs(k) < spec.tail_cutoff) breaks.push_back(k);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end(),
                           [](double a, double b) { return b - a <= 1e-13; }),
               breaks.end());

  const std::size_t cells = breaks.size() - 1;
  std::vector<CellSums> sums(cells);
  for (std::size_t c = 0; c < cells; ++c) sums[c] = integrate_cell(f, breaks[c], breaks[c + 1]);

  double mass = 0.0, mean = 0.0;
  for (const auto& c : sums) {
    mass += c.phi;
    mean += c.phi_f;
  }
  SteinSolution sol;
  sol.f_mean = mean / mass;
  {
    const auto [nodes, weights] = gauss_hermite_normal(128);
    double e = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) e += weights[i] * f.value(nodes[i]);
    sol.f_mean_hermite = e;
  }

  // Centered cell integrals: h~ = f - f_mean.
  std::vector<double> c0(cells), c1(cells), cj(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    c0[c] = sums[c].phi_f - sol.f_mean * sums[c].phi;
    c1[c] = sums[c].t_phi_f - sol.f_mean * sums[c].t_phi;
    cj[c] = sums[c].phi_df;
  }
  // Cumulatives at every breakpoint, each summed from its own tail.
  const std::size_t nb = breaks.size();
  std::vector<double> l0(nb, 0.0), l1(nb, 0.0), lj(nb, 0.0);
  std::vector<double> r0(nb, 0.0), r1(nb, 0.0), rj(nb, 0.0);
  for (std::size_t b = 1; b < nb; ++b) {
    l0[b] = l0[b - 1] + c0[b - 1];
    l1[b] = l1[b - 1] + c1[b - 1];
    lj[b] = lj[b - 1] + cj[b - 1];
  }
  for (std::size_t b = nb - 1; b-- > 0;) {
    r0[b] = r0[b + 1] + c0[b];
    r1[b] = r1[b + 1] + c1[b];
    rj[b] = rj[b + 1] + cj[b];
  }

  const std::size_t count = static_cast<std::size_t>(2 * half_steps + 1);
  sol.grid.resize(count);
  sol.g_values.resize(count);
  sol.g_prime_values.resize(count);
  std::size_t b = 0;
  for (std::size_t j = 0; j < count; ++j) {
    const double x = static_cast<double>(static_cast<long>(j) - half_steps) * h;
    while (breaks[b] < x) ++b;
    const double dens = normal::pdf(x);
    sol.grid[j] = x;
    if (x <= 0.0) {
      sol.g_values[j] = l0[b] / dens;
      sol.g_prime_values[j] = (x * l0[b] - l1[b] + lj[b]) / dens;
    } else {
      sol.g_values[j] = -r0[b] / dens;
      sol.g_prime_values[j] = (r1[b] - x * r0[b] - rj[b]) / dens;
    }
    if (x == 0.0) sol.zero_mismatch = std::abs(l0[b] + r0[b]) / dens;
  }
  for (std::size_t j = 1; j + 1 < count; ++j) {
    const double x = sol.grid[j];
    const double res =
        sol.g_prime_values[j] - x * sol.g_values[j] - (f.value(x) - sol.f_mean);
    sol.max_residual = std::max(sol.max_residual, std::abs(res));
  }
  return sol;
}

SteinBoundReport stein_bound_check(const SteinSolution& sol, double lipschitz) {
  if (!(lipschitz >= 0.0)) throw InvalidInput("Lipschitz constant must be nonnegative");
  if (sol.grid.size() < 3) throw InvalidInput("Stein solution grid is too small");
  const double h = sol.grid[1] - sol.grid[0];
  const auto second = central_differences(sol.g_prime_values, h);
  const std::size_t n = sol.grid.size();
  SteinBoundReport r;
  r.sup_g = sup_abs(sol.g_values, 0, n);
  r.sup_g_prime = sup_abs(sol.g_prime_values, 0, n);
  r.sup_g_second = sup_abs(second, 1, n - 1);
  r.limit_g = 2.0 * lipschitz;
  r.limit_g_prime = normal::kSqrt2OverPi * lipschitz;
  r.limit_g_second = 2.0 * lipschitz;
  r.g_ok = r.sup_g <= r.limit_g + 1e-9;
  r.g_prime_ok = r.sup_g_prime <= r.limit_g_prime + 1e-9;
  r.g_second_ok = r.sup_g_second <= r.limit_g_second + kSecondAllowance;
  return r;
}

ScaledFamilyReport scaled_family_check(const TestFunction& h, double s, double t,
                                       double lipschitz, const SteinGrid& grid) {
  if (!(t > 0.0) || !std::isfinite(t)) throw InvalidInput("scale t must be positive");
  if (!std::isfinite(s)) throw InvalidInput("shift s must be finite");
  TestFunction f;
  f.value = [&h, s, t](double x) { return h.value(t * x + s) / t; };
  if (h.derivative) f.derivative = [&h, s, t](double x) { return h.derivative(t * x + s); };
  for (double k : h.kinks) f.kinks.push_back((k - s) / t);
  const SteinSolution sol = stein_solve(f, grid);

  ScaledFamilyReport r;
  r.s = s;
  r.t = t;
  {
    using boost::math::quadrature::gauss_kronrod;
    std::vector<double> cuts = {-std::numeric_limits<double>::infinity()};
    for (double k : f.kinks) cuts.push_back(k);
    cuts.push_back(std::numeric_limits<double>::infinity());
    std::sort(cuts.begin(), cuts.end());
    auto integrand = [&h, s, t](double x) { return h.value(t * x + s) * normal::pdf(x); };
    double e = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i + 1] > cuts[i]) {
        e += gauss_kronrod<double, 61>::integrate(integrand, cuts[i], cuts[i + 1], 20, 1e-14);
      }
    }
    r.h_mean = e;
  }
  const std::size_t n = sol.grid.size();
  const double step = sol.grid[1] - sol.grid[0];
  const auto second = central_differences(sol.g_prime_values, step);
  for (std::size_t j = 0; j < n; ++j) {
    const double fv = sol.g_values[j];
    const double fp = sol.g_prime_values[j] / t;
    r.sup_f = std::max(r.sup_f, std::abs(fv));
    r.sup_f_prime = std::max(r.sup_f_prime, std::abs(fp));
    if (j == 0 || j + 1 == n) continue;
    const double x = sol.grid[j];
    const double w = s + t * x;
    const double lhs = t * t * fp - (w - s) * fv;
    const double rhs = h.value(w) - r.h_mean;
    r.max_identity_error = std::max(r.max_identity_error, std::abs(lhs - rhs));
    r.sup_f_second = std::max(r.sup_f_second, std::abs(second[j]) / (t * t));
  }
  r.identity_ok = r.max_identity_error <= 1e-5;
  r.bounds_ok = r.sup_f <= 2.0 * lipschitz + 1e-9 && r.sup_f_prime <= lipschitz / t + 1e-9 &&
                r.sup_f_second <= (2.0 * lipschitz + kSecondAllowance) / (t * t);
  return r;
}

TestFunction random_lipschitz_function(std::uint64_t seed, std::uint64_t index) {
  auto stream = CounterRng(derive_seed(seed, 0x5731u)).stream(index, 0);
  const std::size_t kinks = 3 + stream() % 6;
  std::vector<double> at(kinks), slope(kinks + 1);
  for (auto& k : at) k = -6.0 + 12.0 * stream.uniform();
  std::sort(at.begin(), at.end());
  for (auto& sl : slope) sl = -1.0 + 2.0 * stream.uniform();
  const double offset = -1.0 + 2.0 * stream.uniform();

  TestFunction f;
  f.kinks = at;
  f.value = [at, slope, offset](double x) {
    double v = offset + slope[0] * x;
    for (std::size_t i = 0; i < at.size(); ++i) {
      v += (slope[i + 1] - slope[i]) * std::max(0.0, x - at[i]);
    }
    return v;
  };
  f.derivative = [at, slope](double x) {
    const auto i = static_cast<std::size_t>(std::upper_bound(at.begin(), at.end(), x) - at.begin());
    return slope[i];
  };
  return f;
}

}  // namespace mclt
