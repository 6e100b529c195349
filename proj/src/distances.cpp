#include "mclt/distances.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "mclt/errors.hpp"
#include "mclt/normal.hpp"
#include "mclt/parallel.hpp"

namespace mclt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr std::size_t kBootstrapResamples = 200;
constexpr double kMergeTolerance = 1e-12;

// Normal functionals on a sorted support, shared by every weighting of it.
struct NormalTable {
  explicit NormalTable(std::span<const double> xs)
      : x(xs.begin(), xs.end()), cdf(x.size()), ccdf(x.size()), below(x.size()),
        above(x.size()) {
    for (std::size_t i = 0; i < x.size(); ++i) {
      cdf[i] = normal::cdf(x[i]);
      ccdf[i] = normal::ccdf(x[i]);
      below[i] = normal::cdf_integral_below(x[i]);
      above[i] = normal::ccdf_integral_above(x[i]);
    }
  }
  std::vector<double> x, cdf, ccdf, below, above;
};

// Integral of |F - Phi| over [u, v] with v <= 0, F constant. Phi is handled
// through A(x) = integral of Phi up to x.
double gap_left(double u, double v, double f, double au, double av, double cu,
                double cv) {
  if (f == 0.0) return av - au;
  const double phi_int = av - au;
  const double len = v - u;
  if (f <= cu) return phi_int - f * len;
  if (f >= cv) return f * len - phi_int;
  const double c = std::clamp(normal::quantile(f), u, v);
  const double ac = normal::cdf_integral_below(c);
  return (f * (c - u) - (ac - au)) + ((av - ac) - f * (v - c));
}

// Same over [u, v] with u >= 0, written with G = 1 - F and Q = 1 - Phi:
// |F - Phi| = |Q - G|, and B(x) = integral of Q from x to infinity.
double gap_right(double u, double v, double g, double bu, double bv, double qu,
                 double qv) {
  if (g == 0.0) return bu - bv;
  const double q_int = bu - bv;
  const double len = v - u;
  if (g >= qu) return g * len - q_int;
  if (g <= qv) return q_int - g * len;
  const double c = std::clamp(-normal::quantile(g), u, v);
  const double bc = normal::ccdf_integral_above(c);
  return ((bu - bc) - g * (c - u)) + (g * (v - c) - (bc - bv));
}

// Integral over [u, v] at level F (= 1 - G), splitting at 0.
double gap(double u, double v, double f, double g) {
  if (!(u < v)) return 0.0;
  const auto A = [](double x) { return x == -kInf ? 0.0 : normal::cdf_integral_below(x); };
  const auto B = [](double x) { return x == kInf ? 0.0 : normal::ccdf_integral_above(x); };
  if (v <= 0.0) {
    return gap_left(u, v, f, A(u), A(v), normal::cdf(u), normal::cdf(v));
  }
  if (u >= 0.0) {
    return gap_right(u, v, g, B(u), B(v), normal::ccdf(u), normal::ccdf(v));
  }
  return gap_left(u, 0.0, f, A(u), A(0.0), normal::cdf(u), 0.5) +
         gap_right(0.0, v, g, B(0.0), B(v), 0.5, normal::ccdf(v));
}

// Levels F_i (mass at or below x_i) and G_i (mass above x_i), both summed
// from their own side so that neither suffers cancellation.
void levels(std::span<const double> w, std::vector<double>& f, std::vector<double>& g) {
  const std::size_t m = w.size();
  f.resize(m);
  g.resize(m);
  double s = 0.0;
  for (std::size_t i = 0; i < m; ++i) f[i] = (s += w[i]);
  s = 0.0;
  for (std::size_t i = m; i-- > 0;) {
    g[i] = s;
    s += w[i];
  }
}

double kolmogorov_weighted(const NormalTable& t, std::span<const double> w) {
  std::vector<double> f, g;
  levels(w, f, g);
  double k = 0.0;
  for (std::size_t i = 0; i < t.x.size(); ++i) {
    const double f_left = i == 0 ? 0.0 : f[i - 1];
    const double g_left = i == 0 ? 1.0 : g[i - 1];
    double d_right, d_left;
    if (t.x[i] > 0.0) {
      d_right = std::abs(t.ccdf[i] - g[i]);
      d_left = std::abs(t.ccdf[i] - g_left);
    } else {
      d_right = std::abs(f[i] - t.cdf[i]);
      d_left = std::abs(f_left - t.cdf[i]);
    }
    k = std::max({k, d_right, d_left});
  }
  return k;
}

double wasserstein_weighted(const NormalTable& t, std::span<const double> w) {
  std::vector<double> f, g;
  levels(w, f, g);
  const std::size_t m = t.x.size();
  // Left tail at level 0 and right tail at level 1.
  double total = 0.0;
  if (t.x[0] <= 0.0) {
    total += t.below[0];
  } else {
    total += gap(-kInf, t.x[0], 0.0, 1.0);
  }
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double u = t.x[i], v = t.x[i + 1];
    if (!(u < v)) continue;
    if (v <= 0.0) {
      total += gap_left(u, v, f[i], t.below[i], t.below[i + 1], t.cdf[i], t.cdf[i + 1]);
    } else if (u >= 0.0) {
      total += gap_right(u, v, g[i], t.above[i], t.above[i + 1], t.ccdf[i], t.ccdf[i + 1]);
    } else {
      total += gap(u, v, f[i], g[i]);
    }
  }
  if (t.x[m - 1] >= 0.0) {
    total += t.above[m - 1];
  } else {
    total += gap(t.x[m - 1], kInf, 1.0, 0.0);
  }
  return total;
}

DiscreteDistribution merge_atoms(std::vector<std::pair<double, double>> atoms,
                                 double tolerance) {
  std::sort(atoms.begin(), atoms.end());
  DiscreteDistribution d;
  for (const auto& [x, p] : atoms) {
    if (!d.support.empty() && x - d.support.back() <= tolerance) {
      d.probabilities.back() += p;
    } else {
      d.support.push_back(x);
      d.probabilities.push_back(p);
    }
  }
  return d;
}

double sample_sd(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / (n - 1.0));
}

}  // namespace

std::string to_string(DistanceMethod method) {
  return method == DistanceMethod::kExactEnumeration ? "EXACT_ENUMERATION"
                                                     : "EMPIRICAL_EXACT_INTEGRAL";
}

void DiscreteDistribution::validate() const {
  if (support.empty()) throw InvalidInput("distribution has empty support");
  if (support.size() != probabilities.size()) {
    throw InvalidInput("support and probabilities differ in length");
  }
  double total = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) {
    if (!std::isfinite(support[i])) throw InvalidInput("support point is not finite");
    if (i > 0 && !(support[i] > support[i - 1])) {
      throw InvalidInput("support is not strictly increasing");
    }
    if (!(probabilities[i] > 0.0)) throw InvalidInput("probabilities must be positive");
    total += probabilities[i];
  }
  if (std::abs(total - 1.0) > 1e-12) throw InvalidInput("probabilities do not sum to 1");
}

DistanceEstimate kolmogorov_exact(const DiscreteDistribution& dist) {
  dist.validate();
  const NormalTable t(dist.support);
  return {kolmogorov_weighted(t, dist.probabilities), 0.0,
          DistanceMethod::kExactEnumeration, dist.support.size()};
}

DistanceEstimate wasserstein_exact(const DiscreteDistribution& dist) {
  dist.validate();
  const NormalTable t(dist.support);
  return {wasserstein_weighted(t, dist.probabilities), 0.0,
          DistanceMethod::kExactEnumeration, dist.support.size()};
}

double wasserstein_quadrature(const DiscreteDistribution& dist) {
  dist.validate();
  using boost::math::quadrature::gauss_kronrod;
  const auto& x = dist.support;
  const std::size_t m = x.size();
  std::vector<double> f, g;
  levels(dist.probabilities, f, g);
  auto integrate = [](auto fn, double a, double b) {
    return gauss_kronrod<double, 61>::integrate(fn, a, b, 10, 1e-10);
  };
  // Splits at 0 and at the crossing of F and Phi, located by bracketing so
  // that the oracle does not share the normal quantile with the closed form.
  auto piece = [&](double a, double b, double level, double upper) {
    auto signed_gap = [level, upper](double t) {
      return t > 0.0 ? upper - normal::ccdf(t) : normal::cdf(t) - level;
    };
    auto fn = [&](double t) { return std::abs(signed_gap(t)); };
    std::vector<double> cuts = {a};
    if (a < 0.0 && b > 0.0) cuts.push_back(0.0);
    cuts.push_back(b);
    std::vector<double> refined = {cuts[0]};
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double lo = cuts[i], hi = cuts[i + 1];
      if (std::isfinite(lo) && std::isfinite(hi)) {
        const double glo = signed_gap(lo), ghi = signed_gap(hi);
        if (glo * ghi < 0.0) {
          std::uintmax_t iters = 200;
          const auto root = boost::math::tools::toms748_solve(
              signed_gap, lo, hi, glo, ghi, boost::math::tools::eps_tolerance<double>(52), iters);
          refined.push_back(0.5 * (root.first + root.second));
        }
      }
      refined.push_back(hi);
    }
    double sum = 0.0;
    for (std::size_t i = 0; i + 1 < refined.size(); ++i) {
      if (refined[i + 1] > refined[i]) sum += integrate(fn, refined[i], refined[i + 1]);
    }
    return sum;
  };
  double total = piece(-kInf, x[0], 0.0, 1.0);
  for (std::size_t i = 0; i + 1 < m; ++i) total += piece(x[i], x[i + 1], f[i], g[i]);
  total += piece(x[m - 1], kInf, 1.0, 0.0);
  return total;
}

DiscreteDistribution empirical_distribution(std::vector<double> sample) {
  if (sample.empty()) throw InvalidInput("empty sample");
  const double w = 1.0 / static_cast<double>(sample.size());
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(sample.size());
  for (double v : sample) atoms.emplace_back(v, w);
  return merge_atoms(std::move(atoms), 0.0);
}

DistancePair distances_from_sample(std::vector<double> sample, std::uint64_t seed,
                                   unsigned threads) {
  if (sample.size() < 2) throw InvalidInput("need at least two sample values");
  for (double v : sample) {
    if (!std::isfinite(v)) throw InvalidInput("sample value is not finite");
  }
  std::sort(sample.begin(), sample.end());
  const std::size_t m = sample.size();
  const double md = static_cast<double>(m);
  const NormalTable table(sample);
  const std::vector<double> equal(m, 1.0 / md);

  DistancePair out;
  out.kolmogorov = {kolmogorov_weighted(table, equal), std::sqrt(std::log(40.0) / (2.0 * md)),
                    DistanceMethod::kEmpiricalExactIntegral, m};

  const CounterRng rng(derive_seed(seed, 0xB0075742ull));
  std::vector<double> boot(kBootstrapResamples);
  parallel_for(kBootstrapResamples, threads ? threads : default_threads(), [&](std::size_t b) {
    auto stream = rng.stream(b, 0);
    std::vector<double> counts(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      const auto idx = static_cast<std::size_t>(stream() % m);
      counts[idx] += 1.0;
    }
    for (double& c : counts) c /= md;
    boot[b] = wasserstein_weighted(table, counts);
  });
  out.wasserstein = {wasserstein_weighted(table, equal), sample_sd(boot),
                     DistanceMethod::kEmpiricalExactIntegral, m};
  return out;
}

DistancePair estimate_distances_mc(const ModelSpec& spec, std::size_t n,
                                   std::size_t replicates, std::uint64_t seed,
                                   unsigned threads) {
  validate(spec);
  if (n == 0) throw InvalidInput("horizon must be positive");
  if (replicates < 1000) throw InvalidInput("estimate_distances_mc needs >= 1000 replicates");
  if (threads == 0) threads = default_threads();
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<double> sample(replicates);
  parallel_for(replicates, threads, [&](std::size_t r) {
    sample[r] = path_endpoint(spec, n, seed, r) * scale;
  });
  return distances_from_sample(std::move(sample), seed, threads);
}

DiscreteDistribution enumerate_law(const ModelSpec& spec, std::size_t n) {
  if (n == 0 || n > 20) throw InvalidInput("enumerate_law needs 1 <= n <= 20");
  validate(spec);
  double alpha = 0.0, c = 0.0;
  if (const auto* d = std::get_if<VarianceDecay>(&spec)) {
    alpha = d->alpha;
    c = d->c;
  } else if (!std::holds_alternative<Rademacher>(spec)) {
    throw Unsupported("enumerate_law supports the Rademacher and variance-decay models");
  }
  // States (S_k, e_k) with their probabilities; e_0 is a fair sign.
  struct State {
    double s;
    int sign;
    double p;
  };
  std::vector<State> states = {{0.0, -1, 0.5}, {0.0, 1, 0.5}};
  for (std::size_t k = 1; k <= n; ++k) {
    const double ck = c * std::pow(static_cast<double>(k), -alpha);
    std::vector<State> next;
    next.reserve(2 * states.size());
    for (const auto& st : states) {
      const double amp = std::sqrt(1.0 + ck * st.sign);
      next.push_back({st.s + amp, 1, 0.5 * st.p});
      next.push_back({st.s - amp, -1, 0.5 * st.p});
    }
    std::sort(next.begin(), next.end(), [](const State& a, const State& b) {
      return a.sign != b.sign ? a.sign < b.sign : a.s < b.s;
    });
    states.clear();
    for (const auto& st : next) {
      if (!states.empty() && states.back().sign == st.sign &&
          st.s - states.back().s <= kMergeTolerance) {
        states.back().p += st.p;
      } else {
        states.push_back(st);
      }
    }
  }
  const double s_n = std::sqrt(static_cast<double>(n));
  std::vector<std::pair<double, double>> atoms;
  atoms.reserve(states.size());
  for (const auto& st : states) atoms.emplace_back(st.s / s_n, st.p);
  auto d = merge_atoms(std::move(atoms), kMergeTolerance);
  d.validate();
  return d;
}

KwCheck kw_relation_check(const DistanceEstimate& k, const DistanceEstimate& w) {
  if (!(k.value >= 0.0) || !(w.value >= 0.0) || !(k.std_error >= 0.0) ||
      !(w.std_error >= 0.0)) {
    throw InvalidInput("distance estimates must be nonnegative");
  }
  const double root = std::sqrt(w.value);
  KwCheck out;
  out.allowance = 3.0 * k.std_error + kKwConstant * (std::sqrt(w.value + 3.0 * w.std_error) - root);
  out.slack = kKwConstant * root + out.allowance - k.value;
  out.holds = out.slack >= 0.0;
  return out;
}

}  // namespace mclt
