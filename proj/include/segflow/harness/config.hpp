#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "segflow/harness/registry.hpp"
#include "segflow/metric/metric.hpp"

namespace segflow {

enum class ExperimentKind { assumptions, ergodicity, slln, clt, lil, full_suite };

std::string to_string(ExperimentKind k);
ExperimentKind parse_kind(const std::string& s);

// Every numeric knob of a run. Defaults reproduce the reference settings.
struct NumericConfig {
  double step = 1.0 / 128.0;
  // Constant value of the initial segment for slln/clt/lil runs.
  double initial = 0.0;
  std::optional<double> burn_in;
  double thinning = 1.0;

  // Ergodicity.
  double ergodicity_initial = 5.0;
  std::size_t n_traj = 4096;
  std::vector<double> ergodicity_times = {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0};
  std::string ergodicity_mode = "coupled";
  std::size_t transport_cap = 512;
  double moment_p = 2.0;
  // Ensemble size of the rate fit that sets corrector truncation.
  std::size_t rate_traj = 512;

  // Centering.
  std::size_t centering_paths = 64;
  double centering_horizon = 8192.0;
  double centering_burn_in = 10.0;

  // SLLN.
  std::size_t replicas = 1000;
  std::vector<double> slln_times = {4, 8, 16, 32, 64, 128, 256};
  double slln_eps = 0.25;
  double slln_horizon = 512.0;
  std::size_t slln_path_replicas = 200;
  std::size_t slln_checkpoints = 64;

  // Corrector / variance.
  std::size_t stationary_atoms = 256;
  std::size_t inner_replicas = 64;
  std::size_t outer_replicas = 4;
  double corrector_t_max = 6.0;
  std::size_t corrector_k_max = 6;
  double quad_step = 1.0 / 32.0;
  double tail_tolerance = 1e-3;
  std::size_t vph_outer = 256;

  // CLT.
  std::vector<double> clt_times = {16, 64, 256};
  std::size_t clt_replicas = 2000;

  // LIL and quadratic variation.
  std::size_t lil_n_max = 100000;
  std::size_t lil_checkpoints = 200;
  std::size_t qv_n = 256;
  std::size_t qv_sum_replicas = 400;

  // Assumption certificates.
  std::size_t assumption_samples = 2000;
  double assumption_scale = 3.0;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::full_suite;
  std::string model = "linear_delay_ou";
  ParamMap model_params;
  std::string observable = "eval0";
  ParamMap observable_params;
  MetricParams metric;
  NumericConfig numerics;
  std::uint64_t master_seed = 1;
  std::string output_dir = "segflow_out";
};

// Strict parsing: unknown keys, wrong types and out-of-range values raise
// ConfigError naming the dotted key (e.g. "numerics.replicas").
ExperimentConfig parse_config_json(const nlohmann::json& j);
ExperimentConfig parse_config(const std::filesystem::path& path);

// Every effective value, including defaults; parse_config_json(echo) == cfg.
nlohmann::json config_echo(const ExperimentConfig& cfg);

} // namespace segflow
