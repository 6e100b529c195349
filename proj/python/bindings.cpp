#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>

#include "mclt/bounds.hpp"
#include "mclt/bpre.hpp"
#include "mclt/distances.hpp"
#include "mclt/errors.hpp"
#include "mclt/experiments.hpp"
#include "mclt/stein.hpp"

namespace py = pybind11;
using namespace mclt;

namespace {

DiscreteDistribution make_law(std::vector<double> support, std::vector<double> probabilities) {
  DiscreteDistribution d{std::move(support), std::move(probabilities)};
  d.validate();
  return d;
}

MomentProfile profile_for(const std::string& model, std::size_t n, std::size_t moment_replicates,
                          std::uint64_t seed) {
  const auto spec = parse_model(model);
  if (std::holds_alternative<BpreDifference>(spec))
    return estimate_moments(spec, n, moment_replicates, seed);
  return analytic_moments(spec, n);
}

struct SteinReport {
  double f_mean;
  double f_mean_hermite;
  double max_residual;
  double zero_mismatch;
  double sup_g;
  double sup_g_prime;
  double sup_g_second;
  bool passes;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "C++ core of the martingale CLT experiments";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<PreconditionError>(m, "PreconditionError", PyExc_ValueError);
  py::register_exception<Unsupported>(m, "Unsupported", PyExc_NotImplementedError);

  py::class_<DistanceEstimate>(m, "DistanceEstimate")
      .def_readonly("value", &DistanceEstimate::value)
      .def_readonly("std_error", &DistanceEstimate::std_error)
      .def_readonly("sample_size", &DistanceEstimate::sample_size)
      .def("__repr__", [](const DistanceEstimate& d) {
        return "DistanceEstimate(value=" + std::to_string(d.value) +
               ", std_error=" + std::to_string(d.std_error) + ")";
      });

  py::class_<BoundReport>(m, "BoundReport")
      .def_property_readonly("id", [](const BoundReport& r) { return to_string(r.id); })
      .def_readonly("a_used", &BoundReport::a_used)
      .def_readonly("total", &BoundReport::total)
      .def_readonly("per_k_terms", &BoundReport::per_k_terms)
      .def_readonly("tail_term", &BoundReport::tail_term)
      .def_readonly("explicit_constants", &BoundReport::explicit_constants)
      .def_readonly("moment_error", &BoundReport::moment_error)
      .def_readonly("hypothesis_sum", &BoundReport::hypothesis_sum);

  py::class_<SteinReport>(m, "SteinReport")
      .def_readonly("f_mean", &SteinReport::f_mean)
      .def_readonly("f_mean_hermite", &SteinReport::f_mean_hermite)
      .def_readonly("max_residual", &SteinReport::max_residual)
      .def_readonly("zero_mismatch", &SteinReport::zero_mismatch)
      .def_readonly("sup_g", &SteinReport::sup_g)
      .def_readonly("sup_g_prime", &SteinReport::sup_g_prime)
      .def_readonly("sup_g_second", &SteinReport::sup_g_second)
      .def_readonly("passes", &SteinReport::passes);

  m.def("model_id", [](const std::string& text) { return model_id(parse_model(text)); },
        py::arg("model"));

  m.def(
      "generate_path",
      [](const std::string& model, std::size_t n, std::uint64_t seed, std::uint64_t replicate) {
        const auto p = generate_path(parse_model(model), n, seed, replicate);
        return py::make_tuple(std::vector<double>(p.differences().begin(), p.differences().end()),
                              std::vector<double>(p.conditional_variances().begin(),
                                                  p.conditional_variances().end()));
      },
      py::arg("model"), py::arg("n"), py::arg("seed"), py::arg("replicate") = 0,
      "(differences, conditional variances) of one path");

  m.def(
      "path_endpoint",
      [](const std::string& model, std::size_t n, std::uint64_t seed, std::uint64_t replicate) {
        return path_endpoint(parse_model(model), n, seed, replicate);
      },
      py::arg("model"), py::arg("n"), py::arg("seed"), py::arg("replicate") = 0);

  m.def(
      "enumerate_law",
      [](const std::string& model, std::size_t n) {
        const auto d = enumerate_law(parse_model(model), n);
        return py::make_tuple(d.support, d.probabilities);
      },
      py::arg("model"), py::arg("n"), "exact law of S_n / s_n as (support, probabilities)");

  m.def(
      "kolmogorov_exact",
      [](std::vector<double> s, std::vector<double> p) {
        return kolmogorov_exact(make_law(std::move(s), std::move(p))).value;
      },
      py::arg("support"), py::arg("probabilities"));
  m.def(
      "wasserstein_exact",
      [](std::vector<double> s, std::vector<double> p) {
        return wasserstein_exact(make_law(std::move(s), std::move(p))).value;
      },
      py::arg("support"), py::arg("probabilities"));

  m.def(
      "distances_from_sample",
      [](std::vector<double> sample, std::uint64_t seed, unsigned threads) {
        const auto d = distances_from_sample(std::move(sample), seed, threads);
        return py::make_tuple(d.kolmogorov, d.wasserstein);
      },
      py::arg("sample"), py::arg("seed") = 1, py::arg("threads") = 0, "(K, W) estimates");

  m.def(
      "estimate_distances_mc",
      [](const std::string& model, std::size_t n, std::size_t replicates, std::uint64_t seed,
         unsigned threads) {
        py::gil_scoped_release release;
        const auto d = estimate_distances_mc(parse_model(model), n, replicates, seed, threads);
        return std::make_pair(d.kolmogorov, d.wasserstein);
      },
      py::arg("model"), py::arg("n"), py::arg("replicates"), py::arg("seed") = 1,
      py::arg("threads") = 0);

  m.def(
      "evaluate_bound",
      [](const std::string& bound, const std::string& model, std::size_t n, double a,
         std::optional<double> delta, std::size_t moment_replicates, std::uint64_t seed) {
        return evaluate_bound(parse_bound_id(bound), profile_for(model, n, moment_replicates, seed),
                              a, delta);
      },
      py::arg("bound"), py::arg("model"), py::arg("n"), py::arg("a"), py::arg("delta") = py::none(),
      py::arg("moment_replicates") = 10000, py::arg("seed") = 1);

  m.def(
      "optimize_bound",
      [](const std::string& bound, const std::string& model, std::size_t n,
         std::optional<double> delta, std::size_t moment_replicates, std::uint64_t seed) {
        const auto id = parse_bound_id(bound);
        const auto profile = profile_for(model, n, moment_replicates, seed);
        auto [lo, hi] = default_a_range(profile);
        if (id == BoundId::kKTruncated) {
          lo = std::max(lo, 1.0);
          hi = std::max(hi, 1.0);
        }
        return optimize_a([&](double a) { return evaluate_bound(id, profile, a, delta); }, lo, hi);
      },
      py::arg("bound"), py::arg("model"), py::arg("n"), py::arg("delta") = py::none(),
      py::arg("moment_replicates") = 10000, py::arg("seed") = 1);

  m.def(
      "stein_check",
      [](std::function<double(double)> f, std::vector<double> kinks, double lipschitz) {
        const auto sol = stein_solve({std::move(f), std::move(kinks), {}});
        const auto b = stein_bound_check(sol, lipschitz);
        return SteinReport{sol.f_mean,  sol.f_mean_hermite, sol.max_residual,
                           sol.zero_mismatch, b.sup_g, b.sup_g_prime,
                           b.sup_g_second, b.passes() && sol.max_residual <= 1e-6};
      },
      py::arg("f"), py::arg("kinks") = std::vector<double>{}, py::arg("lipschitz") = 1.0,
      "solve the Stein equation for f and check the sup-norm bounds");

  m.def(
      "env_moments",
      [](double ma, double mb, double p) {
        const auto e = env_moments({ma, mb, p});
        py::dict d;
        d["m"] = e.m;
        d["sigma_sq"] = e.sigma_sq;
        d["tau_sq"] = e.tau_sq;
        d["mu"] = e.mu;
        d["nu_sq"] = e.nu_sq;
        return d;
      },
      py::arg("mean_a"), py::arg("mean_b"), py::arg("prob_a"));

  m.def(
      "simulate_bpre",
      [](double ma, double mb, double p, std::size_t generations, std::uint64_t seed,
         std::uint64_t replicate) {
        const auto path = simulate_bpre({ma, mb, p}, generations, seed, replicate);
        return py::make_tuple(path.populations, path.environment_means);
      },
      py::arg("mean_a"), py::arg("mean_b"), py::arg("prob_a"), py::arg("generations"),
      py::arg("seed") = 1, py::arg("replicate") = 0, "(populations, environment means)");

  m.def(
      "lotka_nagaev",
      [](std::vector<double> populations, std::size_t n0, std::size_t n, double ma, double mb,
         double p) {
        BprePath path;
        path.populations = std::move(populations);
        path.environment_means.assign(path.populations.size() - 1, 0.0);
        const auto s = lotka_nagaev(path, n0, n, {ma, mb, p});
        return py::make_tuple(s.m_hat, s.normalized);
      },
      py::arg("populations"), py::arg("n0"), py::arg("n"), py::arg("mean_a"), py::arg("mean_b"),
      py::arg("prob_a"), "(m_hat, normalized statistic)");

  m.def(
      "conditional_moment_check",
      [](double ma, double mb, double p, double z, std::size_t replicates, std::uint64_t seed) {
        py::gil_scoped_release release;
        const auto r = conditional_moment_check({ma, mb, p}, z, replicates, seed);
        return std::make_tuple(r.second_moment, r.second_moment_se, r.target,
                               r.second_moment_ok && r.mean_ok);
      },
      py::arg("mean_a"), py::arg("mean_b"), py::arg("prob_a"), py::arg("z"),
      py::arg("replicates") = 100000, py::arg("seed") = 1,
      "(E xi^2, SE, target, ok)");

  m.def(
      "fit_rate",
      [](std::vector<double> n, std::vector<double> d, bool log_correction) {
        if (n.size() != d.size()) throw InvalidInput("n and d differ in length");
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < n.size(); ++i) pts.emplace_back(n[i], d[i]);
        const auto f = fit_rate(pts, log_correction ? RateCorrection::kLog : RateCorrection::kNone);
        py::dict out;
        out["slope"] = f.slope;
        out["intercept"] = f.intercept;
        out["r_squared"] = f.r_squared;
        out["slope_se"] = f.slope_se;
        return out;
      },
      py::arg("n"), py::arg("d"), py::arg("log_correction") = false);

  m.def(
      "run_config",
      [](const std::string& path, std::optional<std::string> out, unsigned threads) {
        py::list results;
        for (auto cfg : load_config(path)) {
          if (out) cfg.output_dir = *out;
          CampaignResult res;
          {
            py::gil_scoped_release release;
            res = run_campaign(cfg, threads, true);
          }
          py::dict d;
          d["name"] = cfg.name;
          d["csv"] = campaign_csv(cfg, res.records);
          d["files"] = res.files;
          d["failures"] = res.failures;
          results.append(d);
        }
        return results;
      },
      py::arg("config"), py::arg("out") = py::none(), py::arg("threads") = 0);
}
