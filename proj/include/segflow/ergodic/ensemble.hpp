#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "segflow/core/model.hpp"
#include "segflow/core/rng.hpp"
#include "segflow/core/stats.hpp"
#include "segflow/metric/metric.hpp"

namespace segflow {

struct EnsembleConfig {
  std::size_t n_traj = 256;
  // Unset means 10 / lambda1 of the model.
  std::optional<double> burn_in;
  double thinning = 1.0;
  double step = 1.0 / 128.0;
  std::uint64_t master_seed = 1;
  // Segments retained per trajectory after burn-in, `thinning` apart.
  std::size_t samples_per_traj = 1;

  void validate() const;
  double effective_burn_in(const ModelSpec& model) const;
};

// Root stream of an ensemble stage; stage tags keep the stages independent.
RngStream stage_stream(std::uint64_t master_seed, std::uint64_t stage);

namespace stage {
inline constexpr std::uint64_t invariant = 1;
inline constexpr std::uint64_t curve = 2;
inline constexpr std::uint64_t moments = 3;
inline constexpr std::uint64_t exp_moments = 4;
inline constexpr std::uint64_t time_average = 5;
} // namespace stage

// Pooled burn-in-discarded, thinned ensemble (trajectory-major atom order).
EmpiricalMeasure sample_invariant(const ModelSpec& model, const EnsembleConfig& cfg,
                                  const Segment& initial);

struct TimeAverageConfig {
  std::size_t n_traj = 64;
  double burn_in = 10.0;
  double horizon = 2048.0;
  double step = 1.0 / 128.0;
  std::uint64_t master_seed = 1;
};

// Long-run time average of f over n_traj independent paths started at
// `initial`; the standard error comes from the spread of per-path averages.
Estimate stationary_average(const ModelSpec& model, const Observable& f, const Segment& initial,
                            const TimeAverageConfig& cfg);

struct RateFit {
  double c_hat = 0.0;
  double beta_hat = 0.0;
  double beta_se = 0.0;
  double r_squared = 0.0;
  std::vector<double> times;
  std::vector<double> values;

  bool valid() const { return times.size() >= 2; }
  double at(double t) const;
};

// log v = log c - beta t by least squares on strictly positive values.
RateFit fit_rate(std::span<const double> times, std::span<const double> values);

enum class CurveMode {
  // Against the stationary sample itself; limited by its empirical noise floor.
  stationary,
  // Against the reference atoms evolved to the same time on shared noise
  // (trajectory i of both ensembles reads stream i).
  coupled,
};

struct ErgodicityCurve {
  CurveMode mode = CurveMode::coupled;
  std::vector<double> times;
  std::vector<double> distances;
  std::vector<double> std_errors;
  std::vector<char> usable;
  double noise_floor = 0.0;
  std::size_t dropped_nonpositive = 0;
  std::size_t dropped_floor = 0;
  std::size_t blocks = 0;
  RateFit fit;
  // Too few usable points or no significant decay.
  bool flat = false;
};

struct CurveOptions {
  CurveMode mode = CurveMode::coupled;
  WassersteinOptions transport;
};

ErgodicityCurve ergodicity_curve(const ModelSpec& model, const Segment& initial_a,
                                 const EmpiricalMeasure& initial_b, std::span<const double> times,
                                 const MetricParams& mp, const EnsembleConfig& cfg,
                                 const CurveOptions& opts = {});

} // namespace segflow
