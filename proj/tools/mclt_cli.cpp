// mclt: campaign runner and single-shot checks.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mclt/bounds.hpp"
#include "mclt/bpre.hpp"
#include "mclt/distances.hpp"
#include "mclt/errors.hpp"
#include "mclt/experiments.hpp"
#include "mclt/parallel.hpp"
#include "mclt/stein.hpp"

using namespace mclt;

namespace {

struct Globals {
  std::uint64_t seed = 1;
  unsigned threads = 0;
  std::string out;
};

int cmd_run(const Globals& g, const std::string& config_path, bool seed_given) {
  bool ok = true;
  for (auto cfg : load_config(config_path)) {
    if (!g.out.empty()) cfg.output_dir = g.out;
    if (seed_given) cfg.seed = g.seed;
    const auto res = run_campaign(cfg, g.threads, true);
    std::printf("[%s] %zu records\n", cfg.name.c_str(), res.records.size());
    for (const auto& f : res.files) std::printf("  wrote %s\n", f.c_str());
    std::printf("%s", format_summary(summarize(res.records, cfg.slope_tolerance)).c_str());
    for (const auto& f : res.failures) std::printf("ASSERTION FAILED %s\n", f.c_str());
    ok = ok && res.ok();
  }
  return ok ? 0 : 1;
}

int cmd_enumerate(const std::string& model, std::size_t n, bool print_law) {
  const auto spec = parse_model(model);
  const auto law = enumerate_law(spec, n);
  const auto k = kolmogorov_exact(law);
  const auto w = wasserstein_exact(law);
  const double quad = wasserstein_quadrature(law);
  const auto kw = kw_relation_check(k, w);
  std::printf("model %s n %zu atoms %zu\n", model_id(spec).c_str(), n, law.support.size());
  std::printf("K %.17g\nW %.17g\nW_quadrature %.17g\nkw_slack %.17g\n", k.value, w.value, quad,
              kw.slack);
  if (print_law) {
    std::printf("support,probability\n");
    for (std::size_t i = 0; i < law.support.size(); ++i)
      std::printf("%.17g,%.17g\n", law.support[i], law.probabilities[i]);
  }
  return kw.holds && std::abs(quad - w.value) <= 1e-8 ? 0 : 1;
}

int cmd_bounds(const Globals& g, const std::string& model, std::size_t n, std::optional<double> a,
               const std::vector<std::string>& ids, std::optional<double> delta,
               std::size_t moment_replicates) {
  const auto spec = parse_model(model);
  const bool analytic = !std::holds_alternative<BpreDifference>(spec);
  const auto profile = analytic ? analytic_moments(spec, n)
                                : estimate_moments(spec, n, moment_replicates, g.seed);
  std::vector<BoundId> which;
  for (const auto& s : ids) which.push_back(parse_bound_id(s));
  if (which.empty()) {
    which = {BoundId::kKTruncated, BoundId::kKConditional, BoundId::kWStein,
             BoundId::kWMoment, BoundId::kWThirdMoment, BoundId::kWNonstationary};
  }
  std::printf("model %s n %zu s_n %.6g\n", model_id(spec).c_str(), n, profile.s_n());
  std::printf("%-16s %-10s %-14s %-14s %s\n", "bound", "explicit", "a", "total", "moment_se");
  for (BoundId id : which) {
    try {
      check_admissible(id, profile, delta);
      BoundReport r;
      if (a) {
        r = evaluate_bound(id, profile, *a, delta);
      } else {
        auto [lo, hi] = default_a_range(profile);
        if (id == BoundId::kKTruncated) {
          lo = std::max(lo, 1.0);
          hi = std::max(hi, 1.0);
        }
        r = optimize_a([&](double x) { return evaluate_bound(id, profile, x, delta); }, lo, hi);
      }
      std::printf("%-16s %-10s %-14.6g %-14.6g %.3g", to_string(id).c_str(),
                  r.explicit_constants ? "yes" : "no", r.a_used, r.total, r.moment_error);
      if (r.hypothesis_sum) std::printf("  hypothesis_sum %.4g", *r.hypothesis_sum);
      std::printf("\n");
    } catch (const std::exception& e) {
      std::printf("%-16s n/a: %s\n", to_string(id).c_str(), e.what());
    }
  }
  return 0;
}

int cmd_stein(std::uint64_t seed, int count) {
  std::vector<std::pair<std::string, TestFunction>> fns = {
      {"x", {[](double x) { return x; }, {}, [](double) { return 1.0; }}},
      {"|x|", {[](double x) { return std::abs(x); }, {0.0}, {}}}};
  for (int i = 0; i < count; ++i)
    fns.emplace_back("random#" + std::to_string(i), random_lipschitz_function(seed, i));
  bool ok = true;
  std::printf("%-10s %-11s %-9s %-9s %-9s %s\n", "f", "residual", "sup|g|", "sup|g'|",
              "sup|g''|", "result");
  for (const auto& [name, f] : fns) {
    const auto sol = stein_solve(f);
    const auto b = stein_bound_check(sol, 1.0);
    const bool pass = b.passes() && sol.max_residual <= 1e-6;
    ok = ok && pass;
    std::printf("%-10s %-11.3e %-9.5f %-9.5f %-9.5f %s\n", name.c_str(), sol.max_residual,
                b.sup_g, b.sup_g_prime, b.sup_g_second, pass ? "pass" : "FAIL");
  }
  const auto sc = scaled_family_check(fns[1].second, 1.0, 0.5, 1.0);
  std::printf("scaled family (|x|, s=1, t=0.5): identity error %.3e, %s\n", sc.max_identity_error,
              sc.passes() ? "pass" : "FAIL");
  return ok && sc.passes() ? 0 : 1;
}

int cmd_bpre(const Globals& g, const std::string& law_text, std::size_t generations,
             std::size_t n0) {
  const auto spec = parse_model(law_text);
  const auto* b = std::get_if<BpreDifference>(&spec);
  if (!b) throw InvalidInput("--law expects a bpre model, e.g. bpre:ma=1.5,mb=2.5,p=0.5");
  const auto mom = env_moments(b->law);
  std::printf("m %.6g sigma^2 %.6g tau^2 %.6g mu %.6g nu^2 %.6g\n", mom.m, mom.sigma_sq,
              mom.tau_sq, mom.mu, mom.nu_sq);
  const auto path = simulate_bpre(b->law, generations, g.seed);
  std::printf("k,m_k,Z_k\n");
  for (std::size_t k = 0; k <= generations; ++k) {
    if (k < generations) {
      std::printf("%zu,%g,%.17g\n", k, path.environment_means[k], path.populations[k]);
    } else {
      std::printf("%zu,,%.17g\n", k, path.populations[k]);
    }
  }
  if (!path.exact_integers) std::printf("# populations beyond 2^53 are rounded doubles\n");
  if (n0 < generations) {
    const auto s = lotka_nagaev(path, n0, generations - n0, b->law);
    std::printf("lotka_nagaev n0=%zu n=%zu m_hat %.10g S %.10g\n", n0, s.n, s.m_hat, s.normalized);
  }
  bool ok = true;
  for (double z : {1.0, 10.0, 100.0, 10000.0}) {
    const auto rep = conditional_moment_check(b->law, z, 100000, derive_seed(g.seed, z), g.threads);
    std::printf("z=%-6g E xi %.5f (se %.5f)  E xi^2 %.5f (se %.5f) target %.5f %s\n", z,
                rep.mean, rep.mean_se, rep.second_moment, rep.second_moment_se, rep.target,
                rep.mean_ok && rep.second_moment_ok ? "pass" : "FAIL");
    ok = ok && rep.mean_ok && rep.second_moment_ok;
  }
  return ok ? 0 : 1;
}

int cmd_fit(const std::string& csv_path, double tolerance) {
  std::ifstream in(csv_path);
  if (!in) throw InvalidInput("cannot open " + csv_path);
  std::vector<CampaignRecord> recs;
  for (const auto& p : read_campaign_csv(in)) {
    CampaignRecord r;
    r.model_id = p.model_id;
    r.n = p.n;
    r.kolmogorov.value = p.k_hat;
    r.wasserstein.value = p.w_hat;
    recs.push_back(r);
  }
  const auto rows = summarize(recs, tolerance);
  std::printf("%s", format_summary(rows).c_str());
  for (const auto& r : rows)
    if (!r.passes) return 1;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Martingale CLT rate experiments"};
  app.require_subcommand(1);
  Globals g;
  auto* seed_opt = app.add_option("--seed", g.seed, "RNG seed");
  app.add_option("--threads", g.threads, "worker threads (overrides MCLT_THREADS)");
  app.add_option("--out", g.out, "output directory");

  std::string config;
  auto* run = app.add_subcommand("run", "run every experiment of a config file");
  run->add_option("config", config)->required()->check(CLI::ExistingFile);

  std::string model;
  std::size_t n = 0;
  bool print_law = false;
  auto* enumerate = app.add_subcommand("enumerate", "exact law of S_n / s_n and its distances");
  enumerate->add_option("--model", model)->required();
  enumerate->add_option("--n", n)->required()->check(CLI::Range(1, 20));
  enumerate->add_flag("--law", print_law, "print the atoms");

  std::optional<double> a, delta;
  std::vector<std::string> ids;
  std::size_t moment_replicates = 10000;
  auto* bounds = app.add_subcommand("bounds", "evaluate the bound right-hand sides");
  bounds->add_option("--model", model)->required();
  bounds->add_option("--n", n)->required()->check(CLI::PositiveNumber);
  bounds->add_option("--a", a, "fixed a (default: optimized)");
  bounds->add_option("--bound", ids, "bound ids (default: all)");
  bounds->add_option("--delta", delta, "delta for W_MOMENT");
  bounds->add_option("--moment-replicates", moment_replicates);

  int count = 20;
  auto* stein = app.add_subcommand("stein-check", "Stein solver residual and sup-norm bounds");
  stein->add_option("--count", count, "random test functions")->check(CLI::NonNegativeNumber);

  std::string law = "bpre:ma=1.5,mb=2.5,p=0.5";
  std::size_t generations = 60, n0 = 10;
  auto* bpre = app.add_subcommand("bpre", "simulate one branching path and check identities");
  bpre->add_option("--law", law);
  bpre->add_option("--N", generations)->check(CLI::PositiveNumber);
  bpre->add_option("--n0", n0);

  std::string csv;
  double tolerance = 0.12;
  auto* fit = app.add_subcommand("fit", "fit rate exponents from a campaign CSV");
  fit->add_option("csv", csv)->required()->check(CLI::ExistingFile);
  fit->add_option("--tolerance", tolerance);

  CLI11_PARSE(app, argc, argv);
  if (g.threads == 0) g.threads = default_threads();
  try {
    if (*run) return cmd_run(g, config, seed_opt->count() > 0);
    if (*enumerate) return cmd_enumerate(model, n, print_law);
    if (*bounds) return cmd_bounds(g, model, n, a, ids, delta, moment_replicates);
    if (*stein) return cmd_stein(g.seed, count);
    if (*bpre) return cmd_bpre(g, law, generations, n0);
    if (*fit) return cmd_fit(csv, tolerance);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
