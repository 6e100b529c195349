#pragma once

// Config-driven campaigns over (model, n) grids, rate fitting and report
// emission.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mclt/bounds.hpp"
#include "mclt/distances.hpp"
#include "mclt/models.hpp"

namespace mclt {

struct APolicy {
  enum class Kind { kFixed, kPowerRule, kOptimized };
  Kind kind = Kind::kOptimized;
  double value = 0.0;  ///< a for kFixed, delta for kPowerRule

  /// "optimized", "fixed:<a>", "power:<delta>" (a = s_n^(1/(1+delta))).
  std::string to_string() const;
  static APolicy parse(const std::string& text);
};

enum class DistanceMode { kMonteCarlo, kExact };

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<ModelSpec> models;
  std::vector<std::size_t> n_grid;
  std::size_t replicates = 10000;
  /// Paths used for Monte-Carlo moment profiles (models without closed forms).
  std::size_t moment_replicates = 10000;
  APolicy a_policy;
  DistanceMode method = DistanceMode::kMonteCarlo;
  std::vector<BoundId> bounds;
  std::optional<double> delta;  ///< for W_MOMENT; defaults to the model's
  std::uint64_t seed = 1;
  std::string output_dir = ".";
  double slope_tolerance = 0.12;

  /// Invariants that do not need moments: sorted positive grid, replicate
  /// floor for Monte-Carlo runs, exact mode only for enumerable models.
  void validate() const;
};

/// Parses the line-oriented format:
///
///   file     := { line }
///   line     := blank | comment | header | setting
///   comment  := "#" text
///   header   := "[experiment]"
///   setting  := key "=" value
///
/// Settings before the first header are defaults for every block. Keys:
/// name, model (repeatable), n ("16, 32" or "2^4..2^12"), replicates,
/// moment_replicates, a_policy, method (mc | exact), bounds (comma list),
/// delta, seed, output, slope_tolerance.
std::vector<ExperimentConfig> parse_config(std::istream& in);
std::vector<ExperimentConfig> load_config(const std::string& path);

struct BoundResult {
  BoundId id;
  BoundReport report;
  bool dominates = true;  ///< explicit bounds only: total + 3 err >= W - 3 SE
};

struct CampaignRecord {
  std::string model_id;
  std::size_t n = 0;
  std::size_t replicates = 0;
  std::string a_policy;
  double a_used = 0.0;  ///< a of the first requested bound, NaN if none
  DistanceEstimate kolmogorov;
  DistanceEstimate wasserstein;
  std::vector<BoundResult> bounds;
  KwCheck kw;
  double runtime_ms = 0.0;
  std::uint64_t seed = 0;

  bool assertions_hold() const;
};

struct CampaignResult {
  std::vector<CampaignRecord> records;
  std::vector<std::string> failures;  ///< one line per failed hard assertion
  std::vector<std::string> files;     ///< written output paths

  bool ok() const { return failures.empty(); }
};

/// Runs every (model, n) cell in grid order. Inadmissible bound/model pairs
/// are rejected before any simulation. When `write_files` is set, writes
/// <output>/<name>.csv, .timings.csv, .gp and .summary.txt.
CampaignResult run_campaign(const ExperimentConfig& config, unsigned threads = 0,
                            bool write_files = true);

/// CSV with a stable column order and 17 significant digits. Runtime goes
/// to a separate timings file so that this output is reproducible.
std::string campaign_csv(const ExperimentConfig& config,
                         const std::vector<CampaignRecord>& records);
std::string timings_csv(const std::vector<CampaignRecord>& records);
std::string plot_script(const ExperimentConfig& config, const std::string& csv_name);

enum class RateCorrection { kNone, kLog };

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r_squared = 0.0;
  double slope_se = 0.0;
  RateCorrection correction = RateCorrection::kNone;
};

/// OLS of log d (or log(d / ln n)) on log n. Needs >= 4 points, d > 0 and
/// n > 1 under the log correction.
RateFit fit_rate(const std::vector<std::pair<double, double>>& points,
                 RateCorrection correction);

struct TheoryEntry {
  char distance = 'W';  ///< 'K' or 'W'
  double exponent = -0.5;
  RateCorrection correction = RateCorrection::kNone;
};

/// Predicted decay exponents of K and W for a model (empty for the Gaussian
/// model, whose distances vanish).
std::vector<TheoryEntry> theory_for(const ModelSpec& spec);

struct SummaryRow {
  std::string model_id;
  TheoryEntry theory;
  RateFit fit;
  bool passes = false;  ///< |slope - exponent| <= tolerance
};

std::vector<SummaryRow> summarize(const std::vector<CampaignRecord>& records,
                                  double tolerance);
std::string format_summary(const std::vector<SummaryRow>& rows);

/// Reads a campaign CSV back into (model_id, n, K_hat, W_hat) tuples.
struct CsvPoint {
  std::string model_id;
  std::size_t n;
  double k_hat;
  double w_hat;
};
std::vector<CsvPoint> read_campaign_csv(std::istream& in);

}  // namespace mclt
