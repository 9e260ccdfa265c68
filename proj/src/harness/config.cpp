#include "segflow/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "segflow/core/errors.hpp"

namespace segflow {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (!allowed.count(it.key())) {
      throw ConfigError("unknown config key '" + prefix + it.key() + "'");
    }
  }
}

const json& require_object(const json& j, const std::string& key) {
  if (!j.is_object()) fail(key, "expected an object");
  return j;
}

double as_number(const json& j, const std::string& key) {
  if (!j.is_number()) fail(key, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) fail(key, "must be finite");
  return v;
}

std::size_t as_count(const json& j, const std::string& key, std::size_t lo) {
  if (!j.is_number_integer() && !j.is_number_unsigned()) fail(key, "expected an integer");
  const auto v = j.get<long long>();
  if (v < static_cast<long long>(lo)) fail(key, "must be >= " + std::to_string(lo));
  return static_cast<std::size_t>(v);
}

ParamMap as_params(const json& j, const std::string& key) {
  require_object(j, key);
  ParamMap out;
  for (auto it = j.begin(); it != j.end(); ++it) out[it.key()] = as_number(it.value(), key + "." + it.key());
  return out;
}

std::vector<double> as_times(const json& j, const std::string& key) {
  if (!j.is_array() || j.empty()) fail(key, "expected a non-empty array of times");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    const double t = as_number(j[i], key + "[" + std::to_string(i) + "]");
    if (!(t > 0.0)) fail(key, "times must be positive");
    if (!out.empty() && !(t > out.back())) fail(key, "times must be strictly increasing");
    out.push_back(t);
  }
  return out;
}

struct Range {
  double lo;
  double hi;
  bool lo_open;
};

void check_range(double v, Range r, const std::string& key) {
  const bool ok = (r.lo_open ? v > r.lo : v >= r.lo) && v <= r.hi;
  if (!ok) {
    std::ostringstream os;
    os << "value " << v << " outside " << (r.lo_open ? "(" : "[") << r.lo << ", " << r.hi << "]";
    fail(key, os.str());
  }
}

constexpr double kInf = 1e300;

// One entry per numeric knob: reads, validates and echoes the field.
struct Knob {
  const char* key;
  std::function<void(NumericConfig&, const json&, const std::string&)> read;
  std::function<json(const NumericConfig&)> write;
};

Knob real(const char* key, double NumericConfig::*field, Range r) {
  return {key,
          [field, r](NumericConfig& n, const json& j, const std::string& full) {
            const double v = as_number(j, full);
            check_range(v, r, full);
            n.*field = v;
          },
          [field](const NumericConfig& n) { return json(n.*field); }};
}

Knob count(const char* key, std::size_t NumericConfig::*field, std::size_t lo) {
  return {key,
          [field, lo](NumericConfig& n, const json& j, const std::string& full) {
            n.*field = as_count(j, full, lo);
          },
          [field](const NumericConfig& n) { return json(n.*field); }};
}

Knob times(const char* key, std::vector<double> NumericConfig::*field) {
  return {key,
          [field](NumericConfig& n, const json& j, const std::string& full) { n.*field = as_times(j, full); },
          [field](const NumericConfig& n) { return json(n.*field); }};
}

const std::vector<Knob>& knobs() {
  static const std::vector<Knob> table = [] {
    std::vector<Knob> t = {
        real("step", &NumericConfig::step, {0.0, 1.0, true}),
        real("initial", &NumericConfig::initial, {-1e6, 1e6, false}),
        real("thinning", &NumericConfig::thinning, {0.0, kInf, true}),
        real("ergodicity_initial", &NumericConfig::ergodicity_initial, {-1e6, 1e6, false}),
        count("n_traj", &NumericConfig::n_traj, 2),
        times("ergodicity_times", &NumericConfig::ergodicity_times),
        count("transport_cap", &NumericConfig::transport_cap, 2),
        real("moment_p", &NumericConfig::moment_p, {1.0, 64.0, false}),
        count("rate_traj", &NumericConfig::rate_traj, 2),
        count("centering_paths", &NumericConfig::centering_paths, 2),
        real("centering_horizon", &NumericConfig::centering_horizon, {0.0, kInf, true}),
        real("centering_burn_in", &NumericConfig::centering_burn_in, {0.0, kInf, false}),
        count("replicas", &NumericConfig::replicas, 100),
        times("slln_times", &NumericConfig::slln_times),
        real("slln_eps", &NumericConfig::slln_eps, {0.0, 0.5, true}),
        real("slln_horizon", &NumericConfig::slln_horizon, {1.0, kInf, false}),
        count("slln_path_replicas", &NumericConfig::slln_path_replicas, 20),
        count("slln_checkpoints", &NumericConfig::slln_checkpoints, 2),
        count("stationary_atoms", &NumericConfig::stationary_atoms, 2),
        count("inner_replicas", &NumericConfig::inner_replicas, 2),
        count("outer_replicas", &NumericConfig::outer_replicas, 1),
        real("corrector_t_max", &NumericConfig::corrector_t_max, {0.0, kInf, true}),
        count("corrector_k_max", &NumericConfig::corrector_k_max, 1),
        real("quad_step", &NumericConfig::quad_step, {0.0, 1.0, true}),
        real("tail_tolerance", &NumericConfig::tail_tolerance, {0.0, 1.0, true}),
        count("vph_outer", &NumericConfig::vph_outer, 2),
        times("clt_times", &NumericConfig::clt_times),
        count("clt_replicas", &NumericConfig::clt_replicas, 10),
        count("lil_n_max", &NumericConfig::lil_n_max, 16),
        count("lil_checkpoints", &NumericConfig::lil_checkpoints, 2),
        count("qv_n", &NumericConfig::qv_n, 2),
        count("qv_sum_replicas", &NumericConfig::qv_sum_replicas, 2),
        count("assumption_samples", &NumericConfig::assumption_samples, 2),
        real("assumption_scale", &NumericConfig::assumption_scale, {0.0, 1e6, true}),
    };
    t.push_back({"burn_in",
                 [](NumericConfig& n, const json& j, const std::string& full) {
                   if (j.is_null()) {
                     n.burn_in.reset();
                     return;
                   }
                   const double v = as_number(j, full);
                   check_range(v, {0.0, kInf, false}, full);
                   n.burn_in = v;
                 },
                 [](const NumericConfig& n) { return n.burn_in ? json(*n.burn_in) : json(nullptr); }});
    t.push_back({"ergodicity_mode",
                 [](NumericConfig& n, const json& j, const std::string& full) {
                   if (!j.is_string()) fail(full, "expected a string");
                   const auto s = j.get<std::string>();
                   if (s != "coupled" && s != "stationary") fail(full, "must be 'coupled' or 'stationary'");
                   n.ergodicity_mode = s;
                 },
                 [](const NumericConfig& n) { return json(n.ergodicity_mode); }});
    return t;
  }();
  return table;
}

RegistryEntry find_entry(const std::vector<RegistryEntry>& entries, const std::string& name,
                         const std::string& key) {
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  fail(key, "unknown name '" + name + "'");
}

void read_named(const json& j, const std::string& key, std::string& name, ParamMap& params) {
  if (j.is_string()) {
    name = j.get<std::string>();
    params.clear();
    return;
  }
  require_object(j, key);
  reject_unknown(j, {"name", "params"}, key + ".");
  if (!j.contains("name") || !j["name"].is_string()) fail(key + ".name", "required string");
  name = j["name"].get<std::string>();
  params = j.contains("params") ? as_params(j["params"], key + ".params") : ParamMap{};
}

} // namespace

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::assumptions: return "assumptions";
    case ExperimentKind::ergodicity: return "ergodicity";
    case ExperimentKind::slln: return "slln";
    case ExperimentKind::clt: return "clt";
    case ExperimentKind::lil: return "lil";
    case ExperimentKind::full_suite: return "full-suite";
  }
  return "unknown";
}

ExperimentKind parse_kind(const std::string& s) {
  for (auto k : {ExperimentKind::assumptions, ExperimentKind::ergodicity, ExperimentKind::slln,
                 ExperimentKind::clt, ExperimentKind::lil, ExperimentKind::full_suite}) {
    if (to_string(k) == s) return k;
  }
  fail("kind", "unknown experiment kind '" + s + "'");
}

ExperimentConfig parse_config_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  reject_unknown(j, {"kind", "model", "observable", "metric", "numerics", "seed", "output_dir"}, "");
  for (const char* req : {"kind", "model", "seed"}) {
    if (!j.contains(req)) fail(req, "missing required field");
  }

  ExperimentConfig cfg;
  if (!j["kind"].is_string()) fail("kind", "expected a string");
  cfg.kind = parse_kind(j["kind"].get<std::string>());

  read_named(j["model"], "model", cfg.model, cfg.model_params);
  if (j.contains("observable")) read_named(j["observable"], "observable", cfg.observable, cfg.observable_params);

  const auto model_entry = find_entry(model_entries(), cfg.model, "model.name");
  cfg.model_params = resolve_params(model_entry, cfg.model_params, "model.params");
  const auto obs_entry = find_entry(observable_entries(), cfg.observable, "observable.name");
  cfg.observable_params = resolve_params(obs_entry, cfg.observable_params, "observable.params");

  if (j.contains("metric")) {
    const auto& m = require_object(j["metric"], "metric");
    reject_unknown(m, {"p", "gamma"}, "metric.");
    if (m.contains("p")) cfg.metric.p = as_number(m["p"], "metric.p");
    if (m.contains("gamma")) cfg.metric.gamma = as_number(m["gamma"], "metric.gamma");
  }
  try {
    cfg.metric.validate();
  } catch (const Error& e) {
    throw ConfigError(std::string("range error: ") + e.what());
  }

  if (j.contains("numerics")) {
    const auto& n = require_object(j["numerics"], "numerics");
    std::set<std::string> allowed;
    for (const auto& k : knobs()) allowed.insert(k.key);
    reject_unknown(n, allowed, "numerics.");
    for (const auto& k : knobs()) {
      if (n.contains(k.key)) k.read(cfg.numerics, n[k.key], std::string("numerics.") + k.key);
    }
  }
  if (cfg.numerics.thinning < cfg.numerics.step) fail("numerics.thinning", "must be >= numerics.step");

  const auto& seed = j["seed"];
  if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) {
    fail("seed", "expected a non-negative integer");
  }
  cfg.master_seed = seed.get<std::uint64_t>();

  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) fail("output_dir", "expected a string");
    cfg.output_dir = j["output_dir"].get<std::string>();
  }

  // Model construction enforces the structural constants; surface as config errors.
  try {
    make_model(cfg.model, cfg.model_params).shape(cfg.numerics.step);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return cfg;
}

ExperimentConfig parse_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path.string() + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_config_json(j);
}

json config_echo(const ExperimentConfig& cfg) {
  json n = json::object();
  for (const auto& k : knobs()) n[k.key] = k.write(cfg.numerics);
  json j;
  j["kind"] = to_string(cfg.kind);
  j["model"] = {{"name", cfg.model}, {"params", cfg.model_params}};
  j["observable"] = {{"name", cfg.observable}, {"params", cfg.observable_params}};
  j["metric"] = {{"p", cfg.metric.p}, {"gamma", cfg.metric.gamma}};
  j["numerics"] = n;
  j["seed"] = cfg.master_seed;
  j["output_dir"] = cfg.output_dir;
  return j;
}

} // namespace segflow
