#pragma once

#include <exception>
#include <string>

#include "segflow/core/errors.hpp"
#include "segflow/harness/config.hpp"
#include "segflow/harness/report.hpp"

namespace segflow {

// Process exit codes of the CLI.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int internal = 1;
inline constexpr int config = 2;
inline constexpr int numeric = 3;
inline constexpr int statistical = 4;
} // namespace exit_code

// A pipeline stage failed; the original error is nested (std::rethrow_if_nested).
class ExperimentError : public Error {
public:
  ExperimentError(const std::string& what, int code) : Error(what), code_(code) {}
  int code() const { return code_; }

private:
  int code_;
};

// Exit code for an in-flight exception of any type.
int classify_exception(std::exception_ptr e);

// Message of e followed by its nested causes, one per line.
std::string describe_exception(const std::exception& e);

// Runs the configured pipeline. The record's payload holds every series and
// a "verdicts" map; passed is the conjunction of the verdicts. Statistical
// failures (including a non-positive limit variance before the LIL run) are
// reported in the payload, not thrown.
ReportRecord run_experiment(const ExperimentConfig& cfg);

// run_experiment plus report.json, config.echo.json and the CSV series in dir.
ReportRecord run_and_write(const ExperimentConfig& cfg, const std::filesystem::path& dir);

} // namespace segflow
