#include "mclt/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "mclt/errors.hpp"
#include "mclt/parallel.hpp"

namespace mclt {

namespace {

constexpr std::size_t kAdmissibilityReplicates = 100;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string quoted(const std::string& s) { return "\"" + s + "\""; }

std::optional<double> model_delta(const ModelSpec& spec) {
  if (const auto* h = std::get_if<HeavyTail>(&spec)) return h->delta;
  return std::nullopt;
}

bool has_closed_form(const ModelSpec& spec) {
  return !std::holds_alternative<BpreDifference>(spec);
}

MomentProfile profile_for(const ModelSpec& spec, std::size_t n, std::size_t replicates,
                          std::uint64_t seed, HorizonCheck check) {
  if (has_closed_form(spec)) return analytic_moments(spec, n, check);
  return estimate_moments(spec, n, replicates, seed, check);
}

// delta used by W_MOMENT: the config's, else the model's, else 1.
double moment_delta(const ExperimentConfig& cfg, const ModelSpec& spec) {
  if (cfg.delta) return *cfg.delta;
  if (const auto d = model_delta(spec)) return *d;
  return 1.0;
}

BoundReport bound_for_policy(BoundId id, const MomentProfile& profile, const APolicy& policy,
                             double delta) {
  const double s_n = profile.s_n();
  switch (policy.kind) {
    case APolicy::Kind::kFixed: return evaluate_bound(id, profile, policy.value, delta);
    case APolicy::Kind::kPowerRule:
      return evaluate_bound(id, profile, std::pow(s_n, 1.0 / (1.0 + policy.value)), delta);
    case APolicy::Kind::kOptimized: break;
  }
  auto [lo, hi] = default_a_range(profile);
  if (id == BoundId::kKTruncated) {
    lo = std::max(lo, 1.0);
    hi = std::max(hi, 1.0);
  }
  std::optional<double> analytic;
  if (id == BoundId::kWMoment) {
    analytic = std::pow(s_n, 1.0 / (1.0 + delta));
  } else if (const auto d = profile.delta()) {
    analytic = std::pow(s_n, 1.0 / (1.0 + *d));
  }
  return optimize_a([&](double a) { return evaluate_bound(id, profile, a, delta); }, lo, hi,
                    analytic);
}

void check_config_admissible(const ExperimentConfig& cfg) {
  for (const auto& spec : cfg.models) {
    if (cfg.bounds.empty()) continue;
    const auto profile = profile_for(spec, cfg.n_grid.front(), kAdmissibilityReplicates,
                                     cfg.seed, HorizonCheck::kUnchecked);
    for (BoundId id : cfg.bounds) {
      try {
        if (id == BoundId::kKTruncated && cfg.a_policy.kind == APolicy::Kind::kFixed &&
            cfg.a_policy.value < 1.0) {
          throw PreconditionError("K_TRUNCATED needs a >= 1");
        }
        check_admissible(id, profile, moment_delta(cfg, spec));
      } catch (const std::exception& e) {
        throw InvalidInput("experiment '" + cfg.name + "': bound " + to_string(id) +
                           " is inadmissible for " + model_id(spec) + ": " + e.what());
      }
    }
  }
}

std::string theory_label(const TheoryEntry& t) {
  std::ostringstream os;
  os << t.distance << " ~ " << (t.correction == RateCorrection::kLog ? "ln n * " : "")
     << "n^" << t.exponent;
  return os.str();
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted_field = false;
  for (char c : line) {
    if (c == '"') {
      quoted_field = !quoted_field;
    } else if (c == ',' && !quoted_field) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

bool CampaignRecord::assertions_hold() const {
  if (!kw.holds) return false;
  for (const auto& b : bounds) {
    if (!b.dominates) return false;
  }
  return true;
}

CampaignResult run_campaign(const ExperimentConfig& cfg, unsigned threads, bool write_files) {
  cfg.validate();
  check_config_admissible(cfg);
  if (threads == 0) threads = default_threads();

  CampaignResult result;
  for (std::size_t mi = 0; mi < cfg.models.size(); ++mi) {
    const ModelSpec& spec = cfg.models[mi];
    const std::string id = model_id(spec);
    const double delta = moment_delta(cfg, spec);
    for (std::size_t n : cfg.n_grid) {
      const auto start = std::chrono::steady_clock::now();
      const std::uint64_t cell_seed = derive_seed(derive_seed(cfg.seed, mi), n);
      CampaignRecord rec;
      rec.model_id = id;
      rec.n = n;
      rec.a_policy = cfg.a_policy.to_string();
      rec.seed = cell_seed;
      try {
        if (cfg.method == DistanceMode::kExact) {
          const auto law = enumerate_law(spec, n);
          rec.kolmogorov = kolmogorov_exact(law);
          rec.wasserstein = wasserstein_exact(law);
          rec.replicates = 0;
        } else {
          const auto d = estimate_distances_mc(spec, n, cfg.replicates, cell_seed, threads);
          rec.kolmogorov = d.kolmogorov;
          rec.wasserstein = d.wasserstein;
          rec.replicates = cfg.replicates;
        }
        rec.kw = kw_relation_check(rec.kolmogorov, rec.wasserstein);
        rec.a_used = std::numeric_limits<double>::quiet_NaN();
        if (!cfg.bounds.empty()) {
          const auto profile = profile_for(spec, n, cfg.moment_replicates,
                                           derive_seed(cell_seed, 1), HorizonCheck::kStanding);
          for (BoundId bid : cfg.bounds) {
            BoundResult br{bid, bound_for_policy(bid, profile, cfg.a_policy, delta), true};
            if (br.report.explicit_constants) {
              br.dominates = br.report.total + 3.0 * br.report.moment_error >=
                             rec.wasserstein.value - 3.0 * rec.wasserstein.std_error;
            }
            rec.bounds.push_back(std::move(br));
          }
          rec.a_used = rec.bounds.front().report.a_used;
        }
      } catch (const std::exception& e) {
        throw std::runtime_error("experiment '" + cfg.name + "' failed at model " + id +
                                 ", n = " + std::to_string(n) + ": " + e.what());
      }
      rec.runtime_ms = std::chrono::duration<double, std::milli>(
                           std::chrono::steady_clock::now() - start)
                           .count();
      const std::string cell = cfg.name + " " + id + " n=" + std::to_string(n);
      if (!rec.kw.holds) {
        result.failures.push_back(cell + ": K-W relation violated, slack " + num(rec.kw.slack));
      }
      for (const auto& b : rec.bounds) {
        if (!b.dominates) {
          result.failures.push_back(cell + ": " + to_string(b.id) + " total " +
                                    num(b.report.total) + " below W " +
                                    num(rec.wasserstein.value));
        }
      }
      result.records.push_back(std::move(rec));
    }
  }

  if (write_files) {
    namespace fs = std::filesystem;
    fs::create_directories(cfg.output_dir);
    const fs::path base = fs::path(cfg.output_dir) / cfg.name;
    const auto emit = [&](const std::string& suffix, const std::string& body) {
      const std::string path = base.string() + suffix;
      std::ofstream out(path, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + path);
      out << body;
      result.files.push_back(path);
    };
    emit(".csv", campaign_csv(cfg, result.records));
    emit(".timings.csv", timings_csv(result.records));
    emit(".gp", plot_script(cfg, cfg.name + ".csv"));
    emit(".summary.txt", format_summary(summarize(result.records, cfg.slope_tolerance)));
  }
  return result;
}

std::string campaign_csv(const ExperimentConfig& cfg, const std::vector<CampaignRecord>& records) {
  std::ostringstream os;
  os << "model_id,n,replicates,a_policy,a_used,K_hat,K_se,W_hat,W_se";
  for (BoundId id : cfg.bounds) os << ",bound_" << to_string(id);
  os << ",kw_slack,seed\n";
  for (const auto& r : records) {
    os << quoted(r.model_id) << ',' << r.n << ',' << r.replicates << ',' << r.a_policy << ','
       << num(r.a_used) << ',' << num(r.kolmogorov.value) << ',' << num(r.kolmogorov.std_error)
       << ',' << num(r.wasserstein.value) << ',' << num(r.wasserstein.std_error);
    for (const auto& b : r.bounds) os << ',' << num(b.report.total);
    os << ',' << num(r.kw.slack) << ',' << r.seed << '\n';
  }
  return os.str();
}

std::string timings_csv(const std::vector<CampaignRecord>& records) {
  std::ostringstream os;
  os << "model_id,n,runtime_ms\n";
  for (const auto& r : records) {
    os << quoted(r.model_id) << ',' << r.n << ',' << num(r.runtime_ms) << '\n';
  }
  return os.str();
}

std::string plot_script(const ExperimentConfig& cfg, const std::string& csv_name) {
  std::ostringstream os;
  os << "# gnuplot script; run from the directory holding " << csv_name << "\n"
     << "set datafile separator ','\n"
     << "set logscale xy\n"
     << "set xlabel 'n'\n"
     << "set key top right\n"
     << "set terminal pngcairo size 900,600\n";
  const struct {
    const char* column;
    const char* label;
    int index;
  } panels[] = {{"K", "Kolmogorov distance", 6}, {"W", "Wasserstein-1 distance", 8}};
  for (const auto& p : panels) {
    os << "set output '" << cfg.name << "_" << p.column << ".png'\n"
       << "set ylabel '" << p.label << "'\n"
       << "plot ";
    for (std::size_t i = 0; i < cfg.models.size(); ++i) {
      const std::string id = model_id(cfg.models[i]);
      if (i) os << ", \\\n     ";
      os << "'" << csv_name << "' every ::1 using (strcol(1) eq '" << id << "' ? $2 : 1/0):"
         << p.index << " with linespoints title '" << id << "'";
    }
    os << "\n";
  }
  return os.str();
}

RateFit fit_rate(const std::vector<std::pair<double, double>>& points, RateCorrection correction) {
  if (points.size() < 4) throw InvalidInput("fit_rate needs at least 4 points");
  std::vector<double> xs, ys;
  for (const auto& [n, d] : points) {
    if (!(d > 0.0) || !std::isfinite(d)) throw InvalidInput("fit_rate needs positive distances");
    if (!(n > 0.0)) throw InvalidInput("fit_rate needs positive n");
    double y = std::log(d);
    if (correction == RateCorrection::kLog) {
      if (!(n > 1.0)) throw InvalidInput("log correction needs n > 1");
      y -= std::log(std::log(n));
    }
    xs.push_back(std::log(n));
    ys.push_back(y);
  }
  const double k = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= k;
  my /= k;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
    syy += (ys[i] - my) * (ys[i] - my);
  }
  if (!(sxx > 0.0)) throw InvalidInput("fit_rate needs at least two distinct n");
  RateFit fit;
  fit.correction = correction;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - fit.intercept - fit.slope * xs[i];
    sse += e * e;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  fit.slope_se = std::sqrt(sse / (k - 2.0) / sxx);
  return fit;
}

std::vector<TheoryEntry> theory_for(const ModelSpec& spec) {
  if (std::holds_alternative<IidGaussian>(spec)) return {};
  if (std::holds_alternative<Rademacher>(spec)) return {{'W', -0.5, RateCorrection::kLog}};
  if (const auto* h = std::get_if<HeavyTail>(&spec)) {
    if (h->delta < 1.0) return {{'W', -0.5 * h->delta, RateCorrection::kNone}};
    return {{'W', -0.5, RateCorrection::kLog}};
  }
  if (const auto* d = std::get_if<VarianceDecay>(&spec)) {
    return {{'K', -std::min(d->alpha, 0.5), RateCorrection::kLog}};
  }
  return {{'K', -0.5, RateCorrection::kLog}, {'W', -0.5, RateCorrection::kLog}};
}

std::vector<SummaryRow> summarize(const std::vector<CampaignRecord>& records, double tolerance) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<const CampaignRecord*>> by_model;
  for (const auto& r : records) {
    if (!by_model.count(r.model_id)) order.push_back(r.model_id);
    by_model[r.model_id].push_back(&r);
  }
  std::vector<SummaryRow> rows;
  for (const auto& id : order) {
    const auto& recs = by_model[id];
    for (const auto& t : theory_for(parse_model(id))) {
      std::vector<std::pair<double, double>> pts;
      for (const auto* r : recs) {
        const double d = t.distance == 'K' ? r->kolmogorov.value : r->wasserstein.value;
        if (d > 0.0) pts.emplace_back(static_cast<double>(r->n), d);
      }
      if (pts.size() < 4) continue;
      SummaryRow row{id, t, fit_rate(pts, t.correction), false};
      row.passes = std::abs(row.fit.slope - t.exponent) <= tolerance;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_summary(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-40s %-22s %-20s %s\n", "model", "predicted",
                "fitted slope", "result");
  os << buf;
  for (const auto& r : rows) {
    char fit[64];
    std::snprintf(fit, sizeof fit, "%.3f +- %.3f", r.fit.slope, r.fit.slope_se);
    std::snprintf(buf, sizeof buf, "%-40s %-22s %-20s %s\n", r.model_id.c_str(),
                  theory_label(r.theory).c_str(), fit, r.passes ? "pass" : "FAIL");
    os << buf;
  }
  if (rows.empty()) os << "(no model with a predicted rate and >= 4 grid points)\n";
  return os.str();
}

std::vector<CsvPoint> read_campaign_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidInput("empty CSV");
  const auto header = split_csv_line(line);
  auto column = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw InvalidInput("CSV lacks column '" + name + "'");
  };
  const std::size_t c_model = column("model_id"), c_n = column("n"), c_k = column("K_hat"),
                    c_w = column("W_hat");
  std::vector<CsvPoint> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) throw InvalidInput("ragged CSV row");
    out.push_back({f[c_model], static_cast<std::size_t>(std::stoull(f[c_n])), std::stod(f[c_k]),
                   std::stod(f[c_w])});
  }
  return out;
}

}  // namespace mclt
