#include "mclt/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

#include "mclt/errors.hpp"
#include "mclt/normal.hpp"
#include "mclt/parallel.hpp"

namespace mclt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool is_below(Cut cut) { return cut == Cut::kBelow || cut == Cut::kAtOrBelow; }

void check_power(int power) {
  if (power < 0 || power > 3) throw InvalidInput("truncated moment power must be 0..3");
}

// ---------------------------------------------------------------------------
// Analytic providers

class RademacherMoments final : public MomentSource {
 public:
  Provider provider() const override { return Provider::kAnalytic; }
  bool deterministic_variance() const override { return true; }
  MomentValue variance(std::size_t) const override { return {1.0, 0.0}; }
  MomentValue truncated(std::size_t, int power, double t, Cut cut) const override {
    check_power(power);
    return {keeps(cut, 1.0, t) ? 1.0 : 0.0, 0.0};
  }
  MomentValue absolute(std::size_t, double) const override { return {1.0, 0.0}; }
  MomentValue variance_deviation(std::size_t) const override { return {0.0, 0.0}; }
  std::optional<double> sup_conditional_truncated(std::size_t step, int power,
                                                  double t, Cut cut) const override {
    return truncated(step, power, t, cut).value;
  }
};

class GaussianMoments final : public MomentSource {
 public:
  Provider provider() const override { return Provider::kAnalytic; }
  bool deterministic_variance() const override { return true; }
  MomentValue variance(std::size_t) const override { return {1.0, 0.0}; }

  MomentValue truncated(std::size_t, int power, double t, Cut cut) const override {
    check_power(power);
    if (is_below(cut)) return {t <= 0.0 ? 0.0 : below(power, t), 0.0};
    return {t <= 0.0 ? full(power) : above(power, t), 0.0};
  }
  MomentValue absolute(std::size_t, double r) const override {
    return {std::exp(0.5 * r * M_LN2 + std::lgamma(0.5 * (r + 1.0))) / std::sqrt(M_PI),
            0.0};
  }
  MomentValue variance_deviation(std::size_t) const override { return {0.0, 0.0}; }
  std::optional<double> sup_conditional_truncated(std::size_t step, int power,
                                                  double t, Cut cut) const override {
    return truncated(step, power, t, cut).value;
  }

 private:
  static double full(int power) {
    switch (power) {
      case 0: return 1.0;
      case 1: return normal::kSqrt2OverPi;
      case 2: return 1.0;
      default: return 2.0 * normal::kSqrt2OverPi;
    }
  }
  // E[|X|^p 1{|X| > t}], t >= 0.
  static double above(int power, double t) {
    const double q = normal::ccdf(t);
    const double d = normal::pdf(t);
    switch (power) {
      case 0: return 2.0 * q;
      case 1: return 2.0 * d;
      case 2: return 2.0 * (t * d + q);
      default: return 2.0 * (t * t + 2.0) * d;
    }
  }
  // E[|X|^p 1{|X| < t}], t >= 0.
  static double below(int power, double t) {
    const double q = normal::ccdf(t);
    const double d = normal::pdf(t);
    switch (power) {
      case 0: return 1.0 - 2.0 * q;
      case 1: return 2.0 * (normal::kInvSqrt2Pi - d);
      case 2: return 1.0 - 2.0 * q - 2.0 * t * d;
      default: return 2.0 * (2.0 * normal::kInvSqrt2Pi - (t * t + 2.0) * d);
    }
  }
};

class HeavyTailMoments final : public MomentSource {
 public:
  explicit HeavyTailMoments(const HeavyTail& law)
      : beta_(law.beta()), x0_(law.scale()) {}

  Provider provider() const override { return Provider::kAnalytic; }
  bool deterministic_variance() const override { return true; }
  MomentValue variance(std::size_t) const override { return {1.0, 0.0}; }

  MomentValue truncated(std::size_t, int power, double t, Cut cut) const override {
    check_power(power);
    const double p = power;
    if (is_below(cut)) {
      if (t <= x0_) return {0.0, 0.0};
      // beta x0^beta * integral_{x0}^{t} x^{p - beta - 1} dx
      const double e = p - beta_;
      if (e == 0.0) return {beta_ * std::pow(x0_, beta_) * std::log(t / x0_), 0.0};
      return {beta_ * std::pow(x0_, p) * (std::pow(t / x0_, e) - 1.0) / e, 0.0};
    }
    if (p >= beta_) return {kInf, 0.0};
    if (t <= x0_) return {full(p), 0.0};
    return {beta_ * std::pow(x0_, p) * std::pow(t / x0_, p - beta_) / (beta_ - p), 0.0};
  }
  MomentValue absolute(std::size_t, double r) const override {
    return {r >= beta_ ? kInf : full(r), 0.0};
  }
  MomentValue variance_deviation(std::size_t) const override { return {0.0, 0.0}; }
  std::optional<double> sup_conditional_truncated(std::size_t step, int power,
                                                  double t, Cut cut) const override {
    return truncated(step, power, t, cut).value;
  }

 private:
  double full(double r) const { return beta_ * std::pow(x0_, r) / (beta_ - r); }

  double beta_;
  double x0_;
};

class VarianceDecayMoments final : public MomentSource {
 public:
  explicit VarianceDecayMoments(const VarianceDecay& law) : law_(law) {}

  Provider provider() const override { return Provider::kAnalytic; }
  bool deterministic_variance() const override { return law_.c == 0.0; }
  MomentValue variance(std::size_t) const override { return {1.0, 0.0}; }

  MomentValue truncated(std::size_t step, int power, double t, Cut cut) const override {
    check_power(power);
    const auto [hi, lo] = values(step);
    double sum = 0.0;
    if (keeps(cut, hi, t)) sum += std::pow(hi, power);
    if (keeps(cut, lo, t)) sum += std::pow(lo, power);
    return {0.5 * sum, 0.0};
  }
  MomentValue absolute(std::size_t step, double r) const override {
    const auto [hi, lo] = values(step);
    return {0.5 * (std::pow(hi, r) + std::pow(lo, r)), 0.0};
  }
  MomentValue variance_deviation(std::size_t step) const override {
    return {amplitude(step), 0.0};
  }
  // Given e_{k-1}, |X_k| is the constant sqrt(1 + c_k e_{k-1}).
  std::optional<double> sup_conditional_truncated(std::size_t step, int power,
                                                  double t, Cut cut) const override {
    check_power(power);
    const auto [hi, lo] = values(step);
    const double from_hi = keeps(cut, hi, t) ? std::pow(hi, power) : 0.0;
    const double from_lo = keeps(cut, lo, t) ? std::pow(lo, power) : 0.0;
    return std::max(from_hi, from_lo);
  }

 private:
  double amplitude(std::size_t step) const {
    return law_.c * std::pow(static_cast<double>(step + 1), -law_.alpha);
  }
  std::pair<double, double> values(std::size_t step) const {
    const double ck = amplitude(step);
    return {std::sqrt(1.0 + ck), std::sqrt(1.0 - ck)};
  }

  VarianceDecay law_;
};

// ---------------------------------------------------------------------------
// Monte-Carlo provider

class MonteCarloMoments final : public MomentSource {
 public:
  MonteCarloMoments(std::size_t n, std::size_t replicates, bool deterministic)
      : n_(n), replicates_(replicates), deterministic_(deterministic),
        steps_(n) {}

  // abs_values[i][r] = |X_{i+1}| and cond_var[i][r] = sigma_{i+1}^2 on path r.
  void ingest(std::vector<std::vector<double>> abs_values,
              std::vector<std::vector<double>> cond_var) {
    const double R = static_cast<double>(replicates_);
    for (std::size_t i = 0; i < n_; ++i) {
      Step& st = steps_[i];
      st.sorted = std::move(abs_values[i]);
      std::sort(st.sorted.begin(), st.sorted.end());
      for (auto& p : st.prefix) p.assign(replicates_ + 1, 0.0);
      for (std::size_t r = 0; r < replicates_; ++r) {
        const double x = st.sorted[r];
        const double x2 = x * x;
        const double powers[kStoredPowers] = {x, x2, x2 * x, x2 * x2, x2 * x2 * x2};
        for (int j = 0; j < kStoredPowers; ++j) {
          st.prefix[j][r + 1] = st.prefix[j][r] + powers[j];
        }
      }
      const auto& cv = cond_var[i];
      double mean = 0.0;
      for (double v : cv) mean += v;
      mean /= R;
      double ss = 0.0;
      for (double v : cv) ss += (v - mean) * (v - mean);
      st.variance = {mean, std::sqrt(ss / (R - 1.0) / R)};
      double dev = 0.0, dev2 = 0.0;
      for (double v : cv) {
        const double d = std::abs(v - mean);
        dev += d;
        dev2 += d * d;
      }
      const double dev_mean = dev / R;
      st.deviation = {dev_mean, se_from_sums(dev_mean, dev2 / R)};
    }
  }

  Provider provider() const override { return Provider::kMonteCarlo; }
  std::size_t replicates() const override { return replicates_; }
  bool deterministic_variance() const override { return deterministic_; }
  MomentValue variance(std::size_t step) const override { return steps_.at(step).variance; }

  MomentValue truncated(std::size_t step, int power, double t, Cut cut) const override {
    check_power(power);
    const Step& st = steps_.at(step);
    const auto& v = st.sorted;
    std::size_t lo = 0, hi = v.size();
    switch (cut) {
      case Cut::kBelow: hi = std::lower_bound(v.begin(), v.end(), t) - v.begin(); break;
      case Cut::kAtOrBelow: hi = std::upper_bound(v.begin(), v.end(), t) - v.begin(); break;
      case Cut::kAbove: lo = std::upper_bound(v.begin(), v.end(), t) - v.begin(); break;
      case Cut::kAtOrAbove: lo = std::lower_bound(v.begin(), v.end(), t) - v.begin(); break;
    }
    const double R = static_cast<double>(replicates_);
    const double s1 = range_sum(st, power, lo, hi) / R;
    const double s2 = range_sum(st, 2 * power, lo, hi) / R;
    return {s1, se_from_sums(s1, s2)};
  }

  MomentValue absolute(std::size_t step, double r) const override {
    const Step& st = steps_.at(step);
    double s1 = 0.0, s2 = 0.0;
    for (double x : st.sorted) {
      const double p = std::pow(x, r);
      s1 += p;
      s2 += p * p;
    }
    const double R = static_cast<double>(replicates_);
    return {s1 / R, se_from_sums(s1 / R, s2 / R)};
  }

  MomentValue variance_deviation(std::size_t step) const override {
    return steps_.at(step).deviation;
  }

 private:
  static constexpr int kStoredPowers = 5;  // 1, 2, 3, 4, 6

  struct Step {
    std::vector<double> sorted;
    std::vector<double> prefix[kStoredPowers];
    MomentValue variance;
    MomentValue deviation;
  };

  double se_from_sums(double mean, double mean_sq) const {
    const double R = static_cast<double>(replicates_);
    const double var = std::max(0.0, mean_sq - mean * mean) * R / (R - 1.0);
    return std::sqrt(var / R);
  }

  static double range_sum(const Step& st, int power, std::size_t lo, std::size_t hi) {
    if (hi <= lo) return 0.0;
    if (power == 0) return static_cast<double>(hi - lo);
    int slot = 0;
    switch (power) {
      case 1: slot = 0; break;
      case 2: slot = 1; break;
      case 3: slot = 2; break;
      case 4: slot = 3; break;
      case 6: slot = 4; break;
      default: throw InvalidInput("unsupported stored power");
    }
    return st.prefix[slot][hi] - st.prefix[slot][lo];
  }

  std::size_t n_;
  std::size_t replicates_;
  bool deterministic_;
  std::vector<Step> steps_;
};

// ---------------------------------------------------------------------------
// Path kernels. `emit(x, conditional_variance)` is called once per step.

template <class Emit>
void run_steps(const ModelSpec& spec, std::size_t n, std::uint64_t seed,
               std::uint64_t replicate, Emit&& emit) {
  const CounterRng rng(seed);
  std::visit(
      Overloaded{
          [&](const IidGaussian&) {
            for (std::uint32_t k = 1; k <= n; ++k) {
              auto s = rng.stream(replicate, k);
              emit(s.normal(), 1.0);
            }
          },
          [&](const Rademacher&) {
            for (std::uint32_t k = 1; k <= n; ++k) {
              emit((rng.word(replicate, k) >> 63) ? 1.0 : -1.0, 1.0);
            }
          },
          [&](const VarianceDecay& m) {
            double prev = (rng.word(replicate, 0) >> 63) ? 1.0 : -1.0;
            for (std::uint32_t k = 1; k <= n; ++k) {
              const double e = (rng.word(replicate, k) >> 63) ? 1.0 : -1.0;
              const double var = 1.0 + m.c * std::pow(static_cast<double>(k), -m.alpha) * prev;
              emit(e * std::sqrt(var), var);
              prev = e;
            }
          },
          [&](const HeavyTail& m) {
            const double beta = m.beta();
            const double x0 = m.scale();
            for (std::uint32_t k = 1; k <= n; ++k) {
              auto s = rng.stream(replicate, k);
              const double sign = s.sign();
              const double u = s.uniform_open();
              emit(sign * x0 * std::pow(u, -1.0 / beta), 1.0);
            }
          },
          [&](const BpreDifference& m) {
            const auto mom = env_moments(m.law);
            const double sigma = std::sqrt(mom.sigma_sq);
            const BprePath path = simulate_bpre(m.law, m.burn_in + n, seed, replicate);
            for (std::size_t k = 1; k <= n; ++k) {
              const double z = path.populations[m.burn_in + k - 1];
              const double z_next = path.populations[m.burn_in + k];
              emit((z_next / z - mom.m) / sigma,
                   (mom.sigma_sq + mom.tau_sq / z) / mom.sigma_sq);
            }
          },
      },
      spec);
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

double HeavyTail::scale() const {
  const double b = beta();
  return std::sqrt((b - 2.0) / b);
}

void validate(const ModelSpec& spec) {
  std::visit(Overloaded{
                 [](const IidGaussian&) {},
                 [](const Rademacher&) {},
                 [](const VarianceDecay& m) {
                   if (!(m.alpha > 0.0 && m.alpha < 1.0)) {
                     throw InvalidInput("decay model needs alpha in (0, 1)");
                   }
                   if (!(m.c >= 0.0 && m.c < 1.0)) {
                     throw InvalidInput("decay model needs c in [0, 1)");
                   }
                 },
                 [](const HeavyTail& m) {
                   if (!(m.delta > 0.0 && m.delta <= 1.0)) {
                     throw InvalidInput("heavy-tail model needs delta in (0, 1]");
                   }
                   if (!(m.tail_margin > 0.0) || !std::isfinite(m.tail_margin)) {
                     throw InvalidInput(
                         "heavy-tail model needs tail index beta > 2 + delta");
                   }
                 },
                 [](const BpreDifference& m) { validate(m.law); },
             },
             spec);
}

std::string model_id(const ModelSpec& spec) {
  return std::visit(
      Overloaded{
          [](const IidGaussian&) { return std::string("iid_gaussian"); },
          [](const Rademacher&) { return std::string("rademacher"); },
          [](const VarianceDecay& m) {
            return "decay(alpha=" + fmt(m.alpha) + ",c=" + fmt(m.c) + ")";
          },
          [](const HeavyTail& m) {
            return "heavy_tail(delta=" + fmt(m.delta) + ",eps=" + fmt(m.tail_margin) + ")";
          },
          [](const BpreDifference& m) {
            return "bpre(ma=" + fmt(m.law.mean_a) + ",mb=" + fmt(m.law.mean_b) +
                   ",p=" + fmt(m.law.prob_a) + ",n0=" + std::to_string(m.burn_in) + ")";
          },
      },
      spec);
}

ModelSpec parse_model(const std::string& text) {
  std::string s;
  for (char ch : text) {
    if (!std::isspace(static_cast<unsigned char>(ch))) s.push_back(ch);
  }
  std::string name = s, args;
  if (auto pos = s.find_first_of(":("); pos != std::string::npos) {
    name = s.substr(0, pos);
    args = s.substr(pos + 1);
    if (!args.empty() && args.back() == ')') args.pop_back();
  }
  std::map<std::string, double> kv;
  std::istringstream in(args);
  for (std::string item; std::getline(in, item, ',');) {
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw InvalidInput("bad model parameter '" + item + "'");
    try {
      kv[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw InvalidInput("bad numeric value in '" + item + "'");
    }
  }
  auto take = [&](const std::string& key, double fallback) {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    const double v = it->second;
    kv.erase(it);
    return v;
  };
  ModelSpec spec;
  if (name == "gaussian" || name == "iid_gaussian") {
    spec = IidGaussian{};
  } else if (name == "rademacher") {
    spec = Rademacher{};
  } else if (name == "decay" || name == "random_variance_decay") {
    spec = VarianceDecay{take("alpha", 0.5), take("c", 0.5)};
  } else if (name == "heavy" || name == "heavy_tail") {
    spec = HeavyTail{take("delta", 0.5), take("eps", 0.05)};
  } else if (name == "bpre") {
    BpreDifference b;
    b.law.mean_a = take("ma", 1.5);
    b.law.mean_b = take("mb", 2.5);
    b.law.prob_a = take("p", 0.5);
    const double n0 = take("n0", 10.0);
    if (n0 < 0 || n0 != std::floor(n0)) throw InvalidInput("n0 must be a nonnegative integer");
    b.burn_in = static_cast<std::size_t>(n0);
    spec = b;
  } else {
    throw InvalidInput("unknown model '" + name + "'");
  }
  if (!kv.empty()) throw InvalidInput("unknown parameter '" + kv.begin()->first + "' for " + name);
  validate(spec);
  return spec;
}

bool deterministic_variance(const ModelSpec& spec) {
  return std::visit(Overloaded{
                        [](const VarianceDecay& m) { return m.c == 0.0; },
                        [](const BpreDifference&) { return false; },
                        [](const auto&) { return true; },
                    },
                    spec);
}

DifferencePath generate_path(const ModelSpec& spec, std::size_t n, std::uint64_t seed,
                             std::uint64_t replicate) {
  validate(spec);
  if (n == 0) throw InvalidInput("horizon must be positive");
  std::vector<double> x, v;
  x.reserve(n);
  v.reserve(n);
  run_steps(spec, n, seed, replicate, [&](double xi, double vi) {
    x.push_back(xi);
    v.push_back(vi);
  });
  return DifferencePath(std::move(x), std::move(v));
}

double path_endpoint(const ModelSpec& spec, std::size_t n, std::uint64_t seed,
                     std::uint64_t replicate) {
  double s = 0.0;
  run_steps(spec, n, seed, replicate, [&](double xi, double) { s += xi; });
  return s;
}

std::shared_ptr<const MomentSource> analytic_source(const ModelSpec& spec) {
  validate(spec);
  return std::visit(
      Overloaded{
          [](const IidGaussian&) -> std::shared_ptr<const MomentSource> {
            return std::make_shared<GaussianMoments>();
          },
          [](const Rademacher&) -> std::shared_ptr<const MomentSource> {
            return std::make_shared<RademacherMoments>();
          },
          [](const VarianceDecay& m) -> std::shared_ptr<const MomentSource> {
            return std::make_shared<VarianceDecayMoments>(m);
          },
          [](const HeavyTail& m) -> std::shared_ptr<const MomentSource> {
            return std::make_shared<HeavyTailMoments>(m);
          },
          [](const BpreDifference&) -> std::shared_ptr<const MomentSource> {
            throw Unsupported(
                "no closed-form moments for the branching model; use estimate_moments");
          },
      },
      spec);
}

MomentProfile analytic_moments(const ModelSpec& spec, std::size_t n, HorizonCheck check) {
  std::optional<double> delta;
  if (const auto* h = std::get_if<HeavyTail>(&spec)) delta = h->delta;
  return MomentProfile(n, analytic_source(spec), delta, check);
}

MomentProfile estimate_moments(const ModelSpec& spec, std::size_t n, std::size_t replicates,
                               std::uint64_t seed, HorizonCheck check) {
  validate(spec);
  if (n == 0) throw InvalidInput("horizon must be positive");
  if (replicates < 100) throw InvalidInput("estimate_moments needs at least 100 replicates");
  std::vector<std::vector<double>> abs_values(n, std::vector<double>(replicates));
  std::vector<std::vector<double>> cond_var(n, std::vector<double>(replicates));
  parallel_for(replicates, default_threads(), [&](std::size_t r) {
    std::size_t i = 0;
    run_steps(spec, n, seed, r, [&](double x, double v) {
      abs_values[i][r] = std::abs(x);
      cond_var[i][r] = v;
      ++i;
    });
  });
  auto source = std::make_shared<MonteCarloMoments>(n, replicates, deterministic_variance(spec));
  source->ingest(std::move(abs_values), std::move(cond_var));
  std::optional<double> delta;
  if (const auto* h = std::get_if<HeavyTail>(&spec)) delta = h->delta;
  return MomentProfile(n, std::move(source), delta, check);
}

}  // namespace mclt
