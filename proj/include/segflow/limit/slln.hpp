#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "segflow/core/rng.hpp"
#include "segflow/core/trajectory.hpp"
#include "segflow/limit/semigroup.hpp"

namespace segflow {

// (1/t) int_0^t f(X_s) ds by the trapezoid rule over the grid points in
// [0, t]; an off-grid t closes with a partial panel ending at segment_at(t).
double additive_functional(const Trajectory& traj, const Observable& f, double t);

// A_t for each t in `times` along one path of sg from xi (times on the
// evaluator's grid, increasing).
std::vector<double> additive_series(const SemigroupEvaluator& sg, const Observable& f,
                                    const SegmentView& xi, std::span<const double> times,
                                    const RngStream& rng);

struct SllnReport {
  std::vector<double> times;
  std::vector<double> sq_errors;
  std::vector<double> std_errors;
  double slope = 0.0;
  double slope_se = 0.0;
  double slope_lo = 0.0;
  double slope_hi = 0.0;
  double intercept = 0.0;
  // E|A_t|^2 ~ c_env / t envelope fitted at the largest t.
  double c_env = 0.0;
  bool zero_signal = false;
  bool pass = false;
};

// E|A_t^f|^2 over replicas (replica r on rng.child(r)) and its log-log slope.
SllnReport slln_variance_decay(const SemigroupEvaluator& sg, const CenteredObservable& f,
                               const SegmentView& xi, std::span<const double> times,
                               std::size_t replicas, const RngStream& rng);

struct PathwiseSummary {
  double eps = 0.25;
  double horizon = 0.0;
  std::vector<double> checkpoints;
  // Per replica: sup over checkpoints of |A_t| t^{1/2 - eps}.
  std::vector<double> statistic;
  double c_eps = 0.0;
  // Per replica: last checkpoint where |A_t| t^{1/2-eps} > c_eps (0 if never).
  std::vector<double> last_violation;
  // Quantiles at levels 0.05, 0.25, 0.5, 0.75, 0.95.
  std::vector<double> statistic_quantiles;
  std::vector<double> violation_quantiles;
  // Median over replicas of sup_{[T/2,T]} / sup_{[T/4,T/2]}.
  double late_ratio_median = 0.0;
  bool zero_signal = false;
};

PathwiseSummary slln_pathwise(const SemigroupEvaluator& sg, const CenteredObservable& f,
                              const SegmentView& xi, double eps, double horizon,
                              std::size_t replicas, const RngStream& rng,
                              std::size_t n_checkpoints = 64);

// The pathwise statistic for a given eps from stored |A_t| series.
double pathwise_statistic(std::span<const double> times, std::span<const double> abs_a, double eps);

} // namespace segflow
