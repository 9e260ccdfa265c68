#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "segflow/core/parallel.hpp"
#include "segflow/harness/config.hpp"
#include "segflow/harness/registry.hpp"
#include "segflow/harness/runner.hpp"
#include "segflow/limit/semigroup.hpp"

namespace {

std::size_t thread_count(const std::optional<std::size_t>& flag) {
  if (flag) return *flag;
  if (const char* env = std::getenv("SEGFLOW_THREADS")) {
    try {
      return static_cast<std::size_t>(std::stoul(env));
    } catch (const std::exception&) {
      throw segflow::ConfigError(std::string("SEGFLOW_THREADS='") + env + "' is not a thread count");
    }
  }
  return 0;
}

void print_params(const segflow::ParamMap& params) {
  bool first = true;
  for (const auto& [k, v] : params) {
    std::cout << (first ? " (" : ", ") << k << "=" << v;
    first = false;
  }
  if (!first) std::cout << ")";
}

int list_registry() {
  std::cout << "models:\n";
  for (const auto& e : segflow::model_entries()) {
    std::cout << "  " << e.name;
    print_params(e.defaults);
    std::cout << "\n    " << e.description << "\n";
  }
  std::cout << "observables:\n";
  for (const auto& e : segflow::observable_entries()) {
    std::cout << "  " << e.name;
    print_params(e.defaults);
    std::cout << "\n    " << e.description << "\n";
  }
  std::cout << "synthetic kernels:\n";
  for (const auto& k : segflow::kernel_names()) std::cout << "  " << k << "\n";
  return segflow::exit_code::ok;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"segflow: limit theorems for path-dependent SDEs, checked by simulation"};
  app.require_subcommand(1);

  std::string run_config;
  std::optional<std::string> out_dir;
  std::optional<std::size_t> threads;
  std::optional<std::uint64_t> seed;
  auto* run = app.add_subcommand("run", "run an experiment and write report.json plus CSV series");
  run->add_option("config", run_config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "output directory (overrides output_dir)");
  run->add_option("--threads", threads, "worker threads (default: SEGFLOW_THREADS, else all cores)");
  run->add_option("--seed", seed, "master seed (overrides seed)");

  app.add_subcommand("list", "list built-in models, observables and synthetic kernels");

  std::string validate_config;
  auto* validate = app.add_subcommand("validate", "parse a config and print the effective values");
  validate->add_option("config", validate_config, "experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : segflow::exit_code::config;
  }

  try {
    if (app.got_subcommand("list")) return list_registry();

    if (app.got_subcommand("validate")) {
      const auto cfg = segflow::parse_config(validate_config);
      std::cout << segflow::config_echo(cfg).dump(2) << "\n";
      return segflow::exit_code::ok;
    }

    auto cfg = segflow::parse_config(run_config);
    if (out_dir) cfg.output_dir = *out_dir;
    if (seed) cfg.master_seed = *seed;
    segflow::parallel::set_threads(thread_count(threads));

    const auto rec = segflow::run_and_write(cfg, cfg.output_dir);
    std::cout << "experiment " << rec.experiment_id << "\n"
              << "payload digest " << rec.payload_digest << "\n";
    for (const auto& [name, ok] : rec.payload["verdicts"].items()) {
      std::cout << "  " << (ok.get<bool>() ? "PASS " : "FAIL ") << name << "\n";
    }
    std::cout << "wall clock " << rec.wall_clock_seconds << " s, report in " << cfg.output_dir << "\n";
    return rec.passed ? segflow::exit_code::ok : segflow::exit_code::statistical;
  } catch (const std::exception& e) {
    std::cerr << "segflow: " << segflow::describe_exception(e) << "\n";
    return segflow::classify_exception(std::current_exception());
  }
}
