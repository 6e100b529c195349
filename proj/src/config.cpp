#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mclt/errors.hpp"
#include "mclt/experiments.hpp"

namespace mclt {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  for (std::string item; std::getline(in, item, ',');) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

double parse_number(const std::string& text, const std::string& key) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw InvalidInput("bad numeric value for '" + key + "': " + text);
  }
}

std::size_t parse_count(const std::string& text, const std::string& key) {
  const double v = parse_number(text, key);
  if (v < 0 || v != std::floor(v) || v > 1e15) {
    throw InvalidInput("'" + key + "' must be a nonnegative integer");
  }
  return static_cast<std::size_t>(v);
}

// "2^k" or a plain integer.
std::size_t parse_grid_value(const std::string& text) {
  if (const auto caret = text.find('^'); caret != std::string::npos) {
    const auto base = parse_count(trim(text.substr(0, caret)), "n");
    const auto exp = parse_count(trim(text.substr(caret + 1)), "n");
    if (exp > 40) throw InvalidInput("n exponent too large");
    std::size_t v = 1;
    for (std::size_t i = 0; i < exp; ++i) v *= base;
    return v;
  }
  return parse_count(text, "n");
}

std::vector<std::size_t> parse_grid(const std::string& text) {
  std::vector<std::size_t> grid;
  for (const auto& item : split_list(text)) {
    if (const auto dots = item.find(".."); dots != std::string::npos) {
      const std::string lo = trim(item.substr(0, dots)), hi = trim(item.substr(dots + 2));
      const bool powers = lo.find('^') != std::string::npos;
      const std::size_t a = parse_grid_value(lo), b = parse_grid_value(hi);
      if (a == 0 || b < a) throw InvalidInput("bad n range '" + item + "'");
      for (std::size_t v = a; v <= b; v = powers ? v * 2 : v + 1) grid.push_back(v);
    } else {
      grid.push_back(parse_grid_value(item));
    }
  }
  return grid;
}

void apply(ExperimentConfig& cfg, const std::string& key, const std::string& value,
           bool& models_set) {
  if (key == "name") {
    cfg.name = value;
  } else if (key == "model") {
    if (!models_set) cfg.models.clear();
    models_set = true;
    cfg.models.push_back(parse_model(value));
  } else if (key == "n") {
    cfg.n_grid = parse_grid(value);
  } else if (key == "replicates") {
    cfg.replicates = parse_count(value, key);
  } else if (key == "moment_replicates") {
    cfg.moment_replicates = parse_count(value, key);
  } else if (key == "a_policy") {
    cfg.a_policy = APolicy::parse(value);
  } else if (key == "method") {
    if (value == "mc") {
      cfg.method = DistanceMode::kMonteCarlo;
    } else if (value == "exact") {
      cfg.method = DistanceMode::kExact;
    } else {
      throw InvalidInput("method must be 'mc' or 'exact'");
    }
  } else if (key == "bounds") {
    cfg.bounds.clear();
    for (const auto& item : split_list(value)) cfg.bounds.push_back(parse_bound_id(item));
  } else if (key == "delta") {
    cfg.delta = parse_number(value, key);
  } else if (key == "seed") {
    cfg.seed = parse_count(value, key);
  } else if (key == "output") {
    cfg.output_dir = value;
  } else if (key == "slope_tolerance") {
    cfg.slope_tolerance = parse_number(value, key);
  } else {
    throw InvalidInput("unknown config key '" + key + "'");
  }
}

}  // namespace

std::string APolicy::to_string() const {
  std::ostringstream os;
  os.precision(17);
  switch (kind) {
    case Kind::kOptimized: return "optimized";
    case Kind::kFixed: os << "fixed:" << value; break;
    case Kind::kPowerRule: os << "power:" << value; break;
  }
  return os.str();
}

APolicy APolicy::parse(const std::string& text) {
  const std::string t = trim(text);
  APolicy p;
  if (t == "optimized") return p;
  const auto colon = t.find(':');
  if (colon == std::string::npos) throw InvalidInput("bad a_policy '" + text + "'");
  const std::string head = t.substr(0, colon);
  p.value = parse_number(trim(t.substr(colon + 1)), "a_policy");
  if (head == "fixed") {
    p.kind = Kind::kFixed;
    if (!(p.value >= 0.0) || !std::isfinite(p.value)) throw InvalidInput("fixed a must be >= 0");
  } else if (head == "power") {
    p.kind = Kind::kPowerRule;
    if (!(p.value > 0.0 && p.value <= 1.0)) throw InvalidInput("power-rule delta must lie in (0, 1]");
  } else {
    throw InvalidInput("bad a_policy '" + text + "'");
  }
  return p;
}

void ExperimentConfig::validate() const {
  if (models.empty()) throw InvalidInput("experiment '" + name + "' has no model");
  if (n_grid.empty()) throw InvalidInput("experiment '" + name + "' has an empty n grid");
  if (!std::is_sorted(n_grid.begin(), n_grid.end()) ||
      std::adjacent_find(n_grid.begin(), n_grid.end()) != n_grid.end() || n_grid.front() == 0) {
    throw InvalidInput("n grid must be strictly ascending positive integers");
  }
  if (method == DistanceMode::kMonteCarlo && replicates < 1000) {
    throw InvalidInput("Monte-Carlo runs need >= 1000 replicates");
  }
  if (method == DistanceMode::kExact) {
    for (const auto& m : models) {
      if (!std::holds_alternative<Rademacher>(m) && !std::holds_alternative<VarianceDecay>(m)) {
        throw InvalidInput("exact method needs an enumerable model, got " + model_id(m));
      }
    }
    if (n_grid.back() > 20) throw InvalidInput("exact method needs n <= 20");
  }
  if (delta && !(*delta > 0.0 && *delta <= 1.0)) throw InvalidInput("delta must lie in (0, 1]");
  if (name.empty() || name.find('/') != std::string::npos) {
    throw InvalidInput("experiment name must be a plain file stem");
  }
}

std::vector<ExperimentConfig> parse_config(std::istream& in) {
  ExperimentConfig defaults;
  bool default_models = false;
  std::vector<ExperimentConfig> out;
  bool models_set = false;
  bool in_block = false;
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line == "[experiment]") {
      out.push_back(defaults);
      models_set = false;
      in_block = true;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw InvalidInput("config line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    try {
      if (in_block) {
        apply(out.back(), key, value, models_set);
      } else {
        apply(defaults, key, value, default_models);
      }
    } catch (const InvalidInput& e) {
      throw InvalidInput("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (out.empty()) throw InvalidInput("config has no [experiment] block");
  for (const auto& cfg : out) cfg.validate();
  return out;
}

std::vector<ExperimentConfig> load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open config '" + path + "'");
  return parse_config(in);
}

}  // namespace mclt
