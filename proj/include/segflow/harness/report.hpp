#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace segflow {

struct ReportRecord {
  std::string experiment_id;
  // sha256 of the canonical config echo (output_dir excluded).
  std::string config_hash;
  // git blob sha1 of the same canonical bytes.
  std::string input_digest;
  nlohmann::json config;
  // Series, fits, statistics, verdicts and standard errors.
  nlohmann::json payload;
  // sha256 of payload.dump(); the reproducibility fingerprint.
  std::string payload_digest;
  double wall_clock_seconds = 0.0;
  std::uint64_t seed = 0;
  bool passed = false;

  nlohmann::json to_json() const;
};

std::string sha256_hex(std::string_view data);
// sha1("blob <size>\0" + data), as `git hash-object` computes it.
std::string git_blob_sha1(std::string_view data);

// Fills the digests from config and payload.
void seal(ReportRecord& record);

// One CSV per series present in the payload (header row always written):
//   ergodicity.csv  t,W,log_W,fit        (usable points only)
//   slln.csv        t,mse,envelope
//   clt.csv         t,ks,bound_shape     (bound_shape = t^{-1/4})
//   lil.csv         n,normalized_sum,running_max,running_min,plus_D,minus_D
// Returns the written paths; I/O failures throw std::runtime_error.
std::vector<std::filesystem::path> emit_plot_data(const ReportRecord& record,
                                                  const std::filesystem::path& dir);

// report.json and config.echo.json in dir.
void write_report(const ReportRecord& record, const std::filesystem::path& dir);

} // namespace segflow
