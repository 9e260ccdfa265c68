#pragma once

#include <optional>
#include <span>
#include <vector>

#include "segflow/ergodic/ensemble.hpp"

namespace segflow {

struct MomentCurve {
  double p = 2.0;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<double> std_errors;
  // Tightest envelope c (1 + e^{-beta t} ||xi||^p) lying above every point.
  double c_hat = 0.0;
  double beta_hat = 0.0;
  std::vector<double> envelope;
  double envelope_factor = 2.0;
  bool bounded = false;

  double envelope_at(double t, double xi_norm_p) const;
};

// E ||X_t||^p over cfg.n_traj paths from `initial`. The verdict holds when
// every point is finite and below envelope_factor * envelope + 3 se.
MomentCurve moment_curve(const ModelSpec& model, const Segment& initial, double p,
                         std::span<const double> times, const EnsembleConfig& cfg,
                         double envelope_factor = 2.0);

struct ExpMomentProbe {
  std::vector<double> deltas;
  // log of max_k E sup_{t in [k,k+1]} exp(delta ||X_t||^2).
  std::vector<double> log_estimates;
  // Largest single-path share of the windowed sum, worst window.
  std::vector<double> max_share;
  std::vector<char> passed;
  std::optional<double> largest_passing;
};

ExpMomentProbe exp_moment_probe(const ModelSpec& model, const Segment& initial,
                                std::span<const double> delta_grid, std::size_t window_count,
                                const EnsembleConfig& cfg);

} // namespace segflow
