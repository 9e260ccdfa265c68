#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "segflow/core/errors.hpp"
#include "segflow/core/parallel.hpp"
#include "segflow/harness/config.hpp"
#include "segflow/harness/registry.hpp"
#include "segflow/harness/report.hpp"
#include "segflow/harness/runner.hpp"

using namespace segflow;
using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string line; std::getline(ss, line);) out.push_back(line);
  return out;
}

std::string config_error(const json& j) {
  try {
    parse_config_json(j);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

json minimal(const std::string& kind) { return {{"kind", kind}, {"model", "linear_delay_ou"}, {"seed", 1}}; }

std::filesystem::path scratch(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("segflow_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

} // namespace

TEST(Config, MinimalConfigFillsDefaults) {
  const auto cfg = parse_config_json(minimal("slln"));
  EXPECT_EQ(cfg.kind, ExperimentKind::slln);
  EXPECT_EQ(cfg.numerics.replicas, 1000u);
  EXPECT_EQ(cfg.model_params.at("a"), 2.0);
  const json echo = config_echo(cfg);
  for (const char* k : {"step", "burn_in", "replicas", "slln_times", "lil_n_max", "inner_replicas",
                        "transport_cap", "clt_replicas", "centering_horizon"}) {
    EXPECT_TRUE(echo["numerics"].contains(k)) << k;
  }
  EXPECT_EQ(echo["metric"]["p"], 2.0);
  EXPECT_EQ(echo["observable"]["name"], "eval0");
  // Echo closure: the echo parses back to the same effective values.
  EXPECT_EQ(config_echo(parse_config_json(echo)), echo);
}

TEST(Config, RangeErrorNamesTheKey) {
  auto j = minimal("clt");
  j["metric"] = {{"p", 0.5}};
  EXPECT_NE(config_error(j).find("metric.p"), std::string::npos) << config_error(j);
  j = minimal("clt");
  j["numerics"] = {{"step", -1.0}};
  EXPECT_NE(config_error(j).find("numerics.step"), std::string::npos);
}

TEST(Config, UnknownKeysAreRejected) {
  auto j = minimal("slln");
  j["numerics"] = {{"replcias", 10}};
  EXPECT_NE(config_error(j).find("replcias"), std::string::npos);
  j = minimal("slln");
  j["replcias"] = 10;
  EXPECT_NE(config_error(j).find("replcias"), std::string::npos);
  j = minimal("slln");
  j["model"] = {{"name", "linear_delay_ou"}, {"params", {{"alpha", 1.0}}}};
  EXPECT_NE(config_error(j).find("model.params.alpha"), std::string::npos);
}

TEST(Config, MissingAndInvalidFields) {
  json j = minimal("slln");
  j.erase("seed");
  EXPECT_NE(config_error(j).find("seed"), std::string::npos);
  j = minimal("nonsense");
  EXPECT_NE(config_error(j).find("kind"), std::string::npos);
  j = minimal("slln");
  j["model"] = {{"name", "linear_delay_ou"}, {"params", {{"a", 0.2}, {"b", 0.5}}}};
  EXPECT_FALSE(config_error(j).empty());
  EXPECT_THROW(parse_config("/nonexistent/config.json"), ConfigError);
}

TEST(Registry, ListsBuiltins) {
  std::vector<std::string> models, observables;
  for (const auto& e : model_entries()) models.push_back(e.name);
  for (const auto& e : observable_entries()) observables.push_back(e.name);
  EXPECT_NE(std::find(models.begin(), models.end(), "linear_delay_ou"), models.end());
  EXPECT_NE(std::find(models.begin(), models.end(), "tanh_diffusion"), models.end());
  for (const char* o : {"eval0", "sup_norm_pow", "sin_eval0", "lincomb"}) {
    EXPECT_NE(std::find(observables.begin(), observables.end(), o), observables.end()) << o;
  }
}

TEST(Digest, KnownValues) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Runner, AssumptionsOnReferenceModel) {
  auto j = minimal("assumptions");
  j["numerics"] = {{"assumption_samples", 300}};
  const auto rec = run_experiment(parse_config_json(j));
  EXPECT_TRUE(rec.passed);
  const auto& d = rec.payload["assumptions"]["dissipativity"];
  EXPECT_NEAR(d["side_margin"].get<double>(), 3.9 - 0.1 * std::exp(1.95), 1e-12);
  EXPECT_TRUE(rec.payload["verdicts"]["ellipticity"].get<bool>());
}

TEST(Runner, SllnDigestIsReproducibleAcrossThreads) {
  auto j = minimal("slln");
  j["numerics"] = {{"step", 1.0 / 32.0},          {"replicas", 100},
                   {"slln_times", {4, 8, 16, 40}}, {"slln_horizon", 40.0},
                   {"slln_path_replicas", 20},     {"centering_paths", 4},
                   {"centering_horizon", 128.0}};
  const auto cfg = parse_config_json(j);
  parallel::set_threads(1);
  const auto a = run_experiment(cfg);
  parallel::set_threads(3);
  const auto b = run_experiment(cfg);
  parallel::set_threads(0);
  EXPECT_EQ(a.payload_digest, b.payload_digest);
  EXPECT_EQ(a.config_hash, b.config_hash);

  const auto dir = scratch("slln");
  auto moved = cfg;
  moved.output_dir = dir.string();
  const auto c = run_and_write(moved, dir);
  EXPECT_EQ(c.payload_digest, a.payload_digest);
  EXPECT_EQ(c.config_hash, a.config_hash);
  EXPECT_TRUE(std::filesystem::exists(dir / "report.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "config.echo.json"));
  const auto rows = lines(read_file(dir / "slln.csv"));
  EXPECT_EQ(rows.size(), 5u);

  // Re-running from the echoed config reproduces the digest.
  const auto echoed = parse_config(dir / "config.echo.json");
  EXPECT_EQ(run_experiment(echoed).payload_digest, a.payload_digest);
}

TEST(Runner, LilWithZeroVarianceIsAStructuredFailure) {
  auto j = minimal("lil");
  j["observable"] = {{"name", "constant"}, {"params", {{"c", 1.0}}}};
  j["numerics"] = {{"step", 1.0 / 32.0},      {"rate_traj", 64},       {"stationary_atoms", 8},
                   {"inner_replicas", 4},      {"centering_paths", 4},  {"centering_horizon", 64.0},
                   {"lil_n_max", 1000}};
  const auto rec = run_experiment(parse_config_json(j));
  EXPECT_FALSE(rec.passed);
  EXPECT_TRUE(rec.payload["lil"].contains("failure"));
  EXPECT_FALSE(rec.payload["verdicts"]["lil_variance_positive"].get<bool>());
}

TEST(Runner, ErrorsCarryExperimentContext) {
  auto j = minimal("ergodicity");
  // t = 0.3 is off the 1/4 grid.
  j["numerics"] = {{"step", 0.25}, {"ergodicity_times", {0.3, 1.0}}, {"n_traj", 8}};
  const auto cfg = parse_config_json(j);
  try {
    run_experiment(cfg);
    FAIL() << "expected an ExperimentError";
  } catch (const ExperimentError& e) {
    EXPECT_EQ(e.code(), exit_code::config);
    const auto text = describe_exception(e);
    EXPECT_NE(text.find("ergodicity"), std::string::npos);
    EXPECT_NE(text.find("caused by"), std::string::npos);
  }
  EXPECT_EQ(classify_exception(std::make_exception_ptr(NumericBlowup("x", 1.0))), exit_code::numeric);
  EXPECT_EQ(classify_exception(std::make_exception_ptr(ConfigError("x"))), exit_code::config);
}

TEST(PlotData, HeadersMatchGoldenFiles) {
  ReportRecord rec;
  rec.payload = {{"ergodicity", json::object()}, {"slln", json::object()}, {"clt", json::object()},
                 {"lil", json::object()}};
  const auto dir = scratch("golden");
  const auto files = emit_plot_data(rec, dir);
  EXPECT_EQ(files.size(), 4u);
  for (const char* name : {"ergodicity", "slln", "clt", "lil"}) {
    const auto got = read_file(dir / (std::string(name) + ".csv"));
    const auto want = read_file(std::filesystem::path(SEGFLOW_GOLDEN_DIR) / (std::string(name) + ".header"));
    EXPECT_EQ(got, want) << name;
  }
}

TEST(PlotData, ErgodicityRowsSkipDroppedPoints) {
  ReportRecord rec;
  rec.payload["ergodicity"] = {{"times", {0.5, 1.0, 2.0, 3.0}},
                               {"distances", {2.0, 1.0, 0.0, 0.1}},
                               {"usable", {true, true, false, true}},
                               {"fit", {{"c_hat", 3.0}, {"beta_hat", 1.0}}}};
  const auto dir = scratch("erg");
  emit_plot_data(rec, dir);
  const auto rows = lines(read_file(dir / "ergodicity.csv"));
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_EQ(std::count(r.begin(), r.end(), ','), 3);
}

TEST(PlotData, LilReferenceLinesAreConstant) {
  ReportRecord rec;
  rec.payload["lil"] = {{"n_grid", {16, 32, 64}},
                        {"normalized_sums", {0.1, -0.2, 0.3}},
                        {"running_max", {0.1, 0.1, 0.3}},
                        {"running_min", {0.1, -0.2, -0.2}},
                        {"d_hat", 0.75}};
  const auto dir = scratch("lil");
  emit_plot_data(rec, dir);
  const auto rows = lines(read_file(dir / "lil.csv"));
  ASSERT_EQ(rows.size(), 4u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_NE(rows[i].find(",0.75,-0.75"), std::string::npos) << rows[i];
  }
}
