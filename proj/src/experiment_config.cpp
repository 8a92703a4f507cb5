#include "crlab/experiment_config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <sstream>
#include <stdexcept>

#include "crlab/csv.hpp"

namespace crlab {
namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char c : key) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') return false;
  }
  return true;
}

std::vector<std::string> split_commas(const std::string& value) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) parts.push_back(trim(item));
  if (!value.empty() && value.back() == ',') parts.push_back("");
  return parts;
}

/// Typed access to a ConfigDoc that remembers which keys were read, so the
/// caller can reject everything left over. All failures carry the
/// source:line prefix of the offending key.
class ConfigReader {
 public:
  explicit ConfigReader(const ConfigDoc& doc) : doc_(doc) {}

  bool has(const std::string& key) {
    if (doc_.has(key)) seen_.insert(key);
    return doc_.has(key);
  }

  [[noreturn]] void fail(const std::string& key, const std::string& message) const {
    throw std::runtime_error(doc_.where(key) + ": " + message);
  }

  std::string required(const std::string& key) {
    if (!has(key)) fail(key, "required");
    return doc_.values.at(key);
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    return has(key) ? doc_.values.at(key) : fallback;
  }

  double parse_double(const std::string& key, const std::string& text) const {
    try {
      std::size_t used = 0;
      double v = std::stod(text, &used);
      if (used != text.size()) throw std::invalid_argument("");
      if (!std::isfinite(v)) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail(key, "expected a finite number, got '" + text + "'");
    }
  }

  long long parse_int(const std::string& key, const std::string& text) const {
    try {
      std::size_t used = 0;
      long long v = std::stoll(text, &used);
      if (used != text.size()) throw std::invalid_argument("");
      return v;
    } catch (const std::exception&) {
      fail(key, "expected an integer, got '" + text + "'");
    }
  }

  double get_double(const std::string& key, double fallback) {
    return has(key) ? parse_double(key, doc_.values.at(key)) : fallback;
  }

  long long get_int(const std::string& key, long long fallback) {
    return has(key) ? parse_int(key, doc_.values.at(key)) : fallback;
  }

  bool get_bool(const std::string& key, bool fallback) {
    if (!has(key)) return fallback;
    const std::string& v = doc_.values.at(key);
    if (v == "true") return true;
    if (v == "false") return false;
    fail(key, "expected true or false, got '" + v + "'");
  }

  std::vector<double> get_double_list(const std::string& key) {
    std::vector<double> out;
    for (const std::string& part : split_commas(doc_.values.at(key))) {
      if (part.empty()) fail(key, "empty entry in list");
      out.push_back(parse_double(key, part));
    }
    return out;
  }

  std::vector<long long> get_int_list(const std::string& key) {
    std::vector<long long> out;
    for (const std::string& part : split_commas(doc_.values.at(key))) {
      if (part.empty()) fail(key, "empty entry in list");
      out.push_back(parse_int(key, part));
    }
    return out;
  }

  /// Every key the document holds that nothing asked about.
  std::vector<std::string> unread() const {
    std::vector<std::string> out;
    for (const auto& [key, value] : doc_.values) {
      (void)value;
      if (!seen_.count(key)) out.push_back(key);
    }
    return out;
  }

 private:
  const ConfigDoc& doc_;
  std::set<std::string> seen_;
};

bool rects_disjoint(const Region& a, const Region& b) {
  return a.xmax <= b.xmin || b.xmax <= a.xmin || a.ymax <= b.ymin || b.ymax <= a.ymin;
}

}  // namespace

std::string ConfigDoc::where(const std::string& key) const {
  auto it = lines.find(key);
  if (it == lines.end()) return source + ": field " + key;
  return source + ":" + std::to_string(it->second) + ": field " + key;
}

ConfigDoc parse_config_text(const std::string& text, const std::string& source) {
  ConfigDoc doc;
  doc.source = source;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(source + ":" + std::to_string(lineno) +
                               ": expected 'key = value', got '" + line + "'");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) {
      throw std::runtime_error(source + ":" + std::to_string(lineno) +
                               ": malformed key '" + key + "'");
    }
    if (value.empty()) {
      throw std::runtime_error(source + ":" + std::to_string(lineno) + ": field " + key +
                               ": empty value");
    }
    if (doc.has(key)) {
      throw std::runtime_error(source + ":" + std::to_string(lineno) + ": field " + key +
                               ": duplicate of line " + std::to_string(doc.lines[key]));
    }
    doc.values[key] = value;
    doc.lines[key] = lineno;
  }
  return doc;
}

ConfigDoc parse_config_file(const std::string& path) {
  return parse_config_text(read_text_file(path), path);
}

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::tabular_acrl: return "tabular-acrl";
    case ExperimentKind::continuous_acrl: return "continuous-acrl";
    case ExperimentKind::primal_dual: return "primal-dual";
    case ExperimentKind::oracle_certify: return "oracle-certify";
    case ExperimentKind::t0_sweep: return "t0-sweep";
    case ExperimentKind::primal_average: return "primal-average";
  }
  return "?";
}

ExperimentKind experiment_kind_from(const std::string& name) {
  for (ExperimentKind k :
       {ExperimentKind::tabular_acrl, ExperimentKind::continuous_acrl,
        ExperimentKind::primal_dual, ExperimentKind::oracle_certify,
        ExperimentKind::t0_sweep, ExperimentKind::primal_average}) {
    if (name == to_string(k)) return k;
  }
  throw std::runtime_error("unknown experiment kind '" + name +
                           "' (expected tabular-acrl, continuous-acrl, primal-dual, "
                           "oracle-certify, t0-sweep or primal-average)");
}

TabularCmdp EnvironmentSpec::make_tabular() const {
  if (kind != Kind::monitoring3) {
    throw std::logic_error("EnvironmentSpec: not a tabular environment");
  }
  return TabularCmdp::monitoring3(threshold);
}

ContinuousMonitoringEnv EnvironmentSpec::make_continuous() const {
  if (kind != Kind::continuous) {
    throw std::logic_error("EnvironmentSpec: not a continuous environment");
  }
  std::vector<Region> rg =
      regions.empty() ? ContinuousMonitoringEnv::default_four_region().regions() : regions;
  return ContinuousMonitoringEnv(side, max_step, std::move(rg));
}

RbfPolicy PolicySpec::build(const ContinuousMonitoringEnv& env, double lambda_max) const {
  return RbfPolicy::grid(env.side(), per_spatial, env.num_constraints(), lambda_max,
                         per_multiplier, sigma, bandwidth_factor);
}

namespace {

EnvironmentSpec read_environment(ConfigReader& r, ExperimentKind kind) {
  EnvironmentSpec env;
  const bool wants_continuous = kind == ExperimentKind::continuous_acrl;
  env.kind = wants_continuous ? EnvironmentSpec::Kind::continuous
                              : EnvironmentSpec::Kind::monitoring3;
  if (r.has("environment.kind")) {
    const std::string v = r.get_string("environment.kind", "");
    if (v == "monitoring3") {
      env.kind = EnvironmentSpec::Kind::monitoring3;
    } else if (v == "continuous") {
      env.kind = EnvironmentSpec::Kind::continuous;
    } else {
      r.fail("environment.kind", "expected monitoring3 or continuous, got '" + v + "'");
    }
    const bool got_continuous = env.kind == EnvironmentSpec::Kind::continuous;
    if (got_continuous != wants_continuous) {
      r.fail("environment.kind", std::string("kind ") + to_string(kind) + " runs on a " +
                                     (wants_continuous ? "continuous" : "monitoring3") +
                                     " environment");
    }
  }

  if (env.kind == EnvironmentSpec::Kind::monitoring3) {
    env.threshold = r.get_double("environment.threshold", env.threshold);
    if (!(env.threshold > 0.0 && env.threshold < 1.0)) {
      r.fail("environment.threshold", "must lie strictly between 0 and 1");
    }
    // The two monitored rooms are distinct states, so their visitation
    // demands compete for the same unit of time.
    if (2.0 * env.threshold >= 1.0) {
      r.fail("environment.threshold",
             "infeasible: the two constraint levels sum to " +
                 csv_number(2.0 * env.threshold) + " >= 1");
    }
    return env;
  }

  env.side = r.get_double("environment.side", env.side);
  if (!(env.side > 0.0)) r.fail("environment.side", "must be positive");
  env.max_step = r.get_double("environment.max_step", env.max_step);
  if (!(env.max_step > 0.0)) r.fail("environment.max_step", "must be positive");

  // Regions arrive as environment.region.1 = xmin,xmax,ymin,ymax with a
  // parallel thresholds list. No region keys at all means the built-in
  // four-region arena.
  std::vector<Region> rects;
  for (int n = 1;; ++n) {
    const std::string key = "environment.region." + std::to_string(n);
    if (!r.has(key)) break;
    std::vector<double> v = r.get_double_list(key);
    if (v.size() != 4) r.fail(key, "expected xmin,xmax,ymin,ymax");
    Region rect{v[0], v[1], v[2], v[3], 0.0};
    if (!(rect.xmin < rect.xmax && rect.ymin < rect.ymax)) {
      r.fail(key, "rectangle has no area");
    }
    if (rect.xmin < 0.0 || rect.ymin < 0.0 || rect.xmax > env.side || rect.ymax > env.side) {
      r.fail(key, "rectangle leaves the arena [0, " + csv_number(env.side) + "]^2");
    }
    rects.push_back(rect);
  }

  if (rects.empty()) {
    if (r.has("environment.thresholds")) {
      r.fail("environment.thresholds", "set without environment.region.1");
    }
    env.regions = ContinuousMonitoringEnv::default_four_region().regions();
    if (env.side != 10.0) {
      // The built-in rectangles assume the default arena.
      for (const Region& rect : env.regions) {
        if (rect.xmax > env.side || rect.ymax > env.side) {
          r.fail("environment.side",
                 "smaller than the built-in regions; list regions explicitly");
        }
      }
    }
  } else {
    if (!r.has("environment.thresholds")) {
      r.fail("environment.thresholds", "required when regions are listed");
    }
    std::vector<double> ths = r.get_double_list("environment.thresholds");
    if (ths.size() != rects.size()) {
      r.fail("environment.thresholds",
             "got " + std::to_string(ths.size()) + " values for " +
                 std::to_string(rects.size()) + " regions");
    }
    for (double c : ths) {
      if (!(c > 0.0 && c < 1.0)) {
        r.fail("environment.thresholds", "each level must lie strictly between 0 and 1");
      }
    }
    for (std::size_t i = 0; i < rects.size(); ++i) rects[i].threshold = ths[i];
    env.regions = std::move(rects);
  }

  // Disjoint regions cannot share visitation time, so their demands must
  // leave room for travel. Overlapping regions can satisfy several at once
  // and are exempt.
  bool disjoint = true;
  for (std::size_t i = 0; i < env.regions.size() && disjoint; ++i) {
    for (std::size_t j = i + 1; j < env.regions.size(); ++j) {
      if (!rects_disjoint(env.regions[i], env.regions[j])) {
        disjoint = false;
        break;
      }
    }
  }
  if (disjoint) {
    double total = 0.0;
    for (const Region& rect : env.regions) total += rect.threshold;
    if (total >= 1.0) {
      const std::string key =
          r.has("environment.thresholds") ? "environment.thresholds" : "environment.kind";
      r.fail(key, "infeasible: disjoint-region thresholds sum to " + csv_number(total) +
                      " >= 1");
    }
  }
  return env;
}

void read_executor(ConfigReader& r, ExperimentKind kind, ExecConfig* exec) {
  if (kind == ExperimentKind::continuous_acrl) {
    // Continuous execution follows the one-step-epoch, small-step regime.
    exec->eta_lambda = 0.01;
    exec->t0 = 1;
    exec->epochs = 20000;
  }
  exec->eta_lambda = r.get_double("executor.eta_lambda", exec->eta_lambda);
  exec->t0 = static_cast<int>(r.get_int("executor.t0", exec->t0));
  exec->epochs = static_cast<int>(r.get_int("executor.epochs", exec->epochs));
  exec->trace_every = static_cast<int>(r.get_int("executor.trace_every", exec->trace_every));
  exec->occupancy_bins =
      static_cast<int>(r.get_int("executor.occupancy_bins", exec->occupancy_bins));
  if (r.has("executor.lambda0")) exec->lambda0 = r.get_double_list("executor.lambda0");
  if (kind != ExperimentKind::continuous_acrl) {
    exec->probe_state = static_cast<int>(r.get_int("executor.probe_state", 1));
    if (exec->probe_state > 2) {
      r.fail("executor.probe_state", "monitoring3 has states 0, 1 and 2 (-1 disables)");
    }
    exec->record_policies = r.get_bool("executor.record_policies", false);
  }
}

void read_trainer(ConfigReader& r, TrainConfig* train, PolicySpec* policy) {
  train->iterations = r.get_int("trainer.iterations", train->iterations);
  train->horizon = static_cast<int>(r.get_int("trainer.horizon", train->horizon));
  train->eta_theta = r.get_double("trainer.eta_theta", train->eta_theta);
  train->lambda_max = r.get_double("trainer.lambda_max", train->lambda_max);
  train->batch = static_cast<int>(r.get_int("trainer.batch", train->batch));
  train->curve_every = static_cast<int>(r.get_int("trainer.curve_every", train->curve_every));
  if (r.has("trainer.baseline")) {
    const std::string v = r.get_string("trainer.baseline", "");
    if (v == "none") {
      train->baseline = TrainConfig::Baseline::none;
    } else if (v == "mean-subtraction") {
      train->baseline = TrainConfig::Baseline::mean_subtraction;
    } else {
      r.fail("trainer.baseline", "expected none or mean-subtraction, got '" + v + "'");
    }
  }

  policy->per_spatial = static_cast<int>(r.get_int("policy.per_spatial", policy->per_spatial));
  policy->per_multiplier =
      static_cast<int>(r.get_int("policy.per_multiplier", policy->per_multiplier));
  policy->sigma = r.get_double("policy.sigma", policy->sigma);
  policy->bandwidth_factor = r.get_double("policy.bandwidth_factor", policy->bandwidth_factor);
  if (policy->per_spatial < 1) r.fail("policy.per_spatial", "must be at least 1");
  if (policy->per_multiplier < 1) r.fail("policy.per_multiplier", "must be at least 1");
  if (!(policy->sigma > 0.0)) r.fail("policy.sigma", "must be positive");
  if (!(policy->bandwidth_factor > 0.0)) r.fail("policy.bandwidth_factor", "must be positive");
}

void read_primal_dual(ConfigReader& r, PrimalDualConfig* pd) {
  pd->eta_primal = r.get_double("primal_dual.eta_primal", pd->eta_primal);
  pd->eta_dual = r.get_double("primal_dual.eta_dual", pd->eta_dual);
  pd->t0 = static_cast<int>(r.get_int("primal_dual.t0", pd->t0));
  pd->epochs = static_cast<int>(r.get_int("primal_dual.epochs", pd->epochs));
  pd->trace_every = static_cast<int>(r.get_int("primal_dual.trace_every", pd->trace_every));
  pd->probe_state = static_cast<int>(r.get_int("primal_dual.probe_state", 1));
  if (pd->probe_state > 2) {
    r.fail("primal_dual.probe_state", "monitoring3 has states 0, 1 and 2 (-1 disables)");
  }
  pd->occupancy_bins =
      static_cast<int>(r.get_int("primal_dual.occupancy_bins", pd->occupancy_bins));
  if (r.has("primal_dual.lambda0")) pd->lambda0 = r.get_double_list("primal_dual.lambda0");
}

void read_checks(ConfigReader& r, CheckTolerances* checks) {
  checks->feasibility = r.get_double("checks.feasibility", checks->feasibility);
  checks->objective = r.get_double("checks.objective", checks->objective);
  checks->slackness = r.get_double("checks.slackness", checks->slackness);
  checks->mean_feasibility = r.get_double("checks.mean_feasibility", checks->mean_feasibility);
  checks->probe_fraction = r.get_double("checks.probe_fraction", checks->probe_fraction);
  checks->pd_feasibility = r.get_double("checks.pd_feasibility", checks->pd_feasibility);
  checks->ball_slack = r.get_double("checks.ball_slack", checks->ball_slack);
  for (double v : {checks->feasibility, checks->objective, checks->slackness,
                   checks->mean_feasibility, checks->pd_feasibility}) {
    if (v < 0.0) r.fail("checks.feasibility", "tolerances must be nonnegative");
  }
  if (!(checks->probe_fraction >= 0.0 && checks->probe_fraction <= 1.0)) {
    r.fail("checks.probe_fraction", "must lie in [0, 1]");
  }
  if (!(checks->ball_slack > 0.0)) r.fail("checks.ball_slack", "must be positive");
}

}  // namespace

ExperimentConfig ExperimentConfig::from_doc(const ConfigDoc& doc) {
  ConfigReader r(doc);
  ExperimentConfig cfg;

  const long long version = r.get_int("schema_version", -1);
  if (!doc.has("schema_version")) r.fail("schema_version", "required");
  if (version != 1) {
    r.fail("schema_version", "unsupported version " + std::to_string(version) +
                                 " (this build reads version 1)");
  }

  cfg.kind = experiment_kind_from(r.required("kind"));

  if (!r.has("seeds")) r.fail("seeds", "required");
  for (long long s : r.get_int_list("seeds")) {
    if (s < 0) r.fail("seeds", "seeds must be nonnegative");
    cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  if (cfg.seeds.empty()) r.fail("seeds", "at least one seed");
  {
    std::set<std::uint64_t> unique(cfg.seeds.begin(), cfg.seeds.end());
    if (unique.size() != cfg.seeds.size()) {
      r.fail("seeds", "duplicate seeds would overwrite each other's artifacts");
    }
  }

  cfg.output_dir = r.required("output_dir");
  cfg.jobs = static_cast<int>(r.get_int("jobs", cfg.jobs));
  if (cfg.jobs < 1) r.fail("jobs", "must be at least 1");

  cfg.environment = read_environment(r, cfg.kind);
  const std::size_t m = cfg.environment.kind == EnvironmentSpec::Kind::monitoring3
                            ? 2
                            : cfg.environment.regions.size();

  switch (cfg.kind) {
    case ExperimentKind::tabular_acrl:
    case ExperimentKind::t0_sweep:
    case ExperimentKind::primal_average:
    case ExperimentKind::continuous_acrl:
      read_executor(r, cfg.kind, &cfg.executor);
      try {
        cfg.executor.validate(m);
      } catch (const std::exception& e) {
        throw std::runtime_error(doc.source + ": executor block: " + e.what());
      }
      break;
    case ExperimentKind::primal_dual:
      read_primal_dual(r, &cfg.primal_dual);
      try {
        cfg.primal_dual.validate(m);
      } catch (const std::exception& e) {
        throw std::runtime_error(doc.source + ": primal_dual block: " + e.what());
      }
      break;
    case ExperimentKind::oracle_certify:
      cfg.oracle_lambda_max = r.get_double("oracle.lambda_max", cfg.oracle_lambda_max);
      cfg.oracle_grid_step = r.get_double("oracle.grid_step", cfg.oracle_grid_step);
      cfg.oracle_refine_step = r.get_double("oracle.refine_step", cfg.oracle_refine_step);
      cfg.oracle_surface_step = r.get_double("oracle.surface_step", cfg.oracle_surface_step);
      for (double v : {cfg.oracle_lambda_max, cfg.oracle_grid_step, cfg.oracle_refine_step,
                       cfg.oracle_surface_step}) {
        if (!(v > 0.0)) r.fail("oracle.lambda_max", "oracle settings must be positive");
      }
      break;
  }

  if (cfg.kind == ExperimentKind::continuous_acrl) {
    read_trainer(r, &cfg.trainer, &cfg.policy);
    try {
      cfg.trainer.validate();
    } catch (const std::exception& e) {
      throw std::runtime_error(doc.source + ": trainer block: " + e.what());
    }
  }

  if (cfg.kind == ExperimentKind::t0_sweep) {
    if (r.has("sweep.t0_values")) {
      cfg.sweep_t0.clear();
      for (long long v : r.get_int_list("sweep.t0_values")) {
        if (v < 1) r.fail("sweep.t0_values", "epoch lengths must be at least 1");
        cfg.sweep_t0.push_back(static_cast<int>(v));
      }
    }
    std::set<int> distinct(cfg.sweep_t0.begin(), cfg.sweep_t0.end());
    if (distinct.size() < 2) {
      r.fail("sweep.t0_values", "need at least two distinct epoch lengths");
    }
  }

  if (cfg.kind == ExperimentKind::primal_average) {
    cfg.average_replay_steps = r.get_int("average.replay_steps", cfg.average_replay_steps);
    if (cfg.average_replay_steps < 1) r.fail("average.replay_steps", "must be at least 1");
  }

  read_checks(r, &cfg.checks);

  const std::vector<std::string> leftover = r.unread();
  if (!leftover.empty()) {
    std::string msg = doc.where(leftover.front()) + ": unknown key";
    if (leftover.size() > 1) {
      msg += " (and " + std::to_string(leftover.size() - 1) + " more)";
    }
    msg += "; not part of the schema or not used by kind ";
    msg += to_string(cfg.kind);
    throw std::runtime_error(msg);
  }

  std::ostringstream canon;
  for (const auto& [key, value] : doc.values) canon << key << " = " << value << '\n';
  cfg.canonical_text = canon.str();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  return ExperimentConfig::from_doc(parse_config_file(path));
}

}  // namespace crlab
