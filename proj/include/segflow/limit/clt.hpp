#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "segflow/core/rng.hpp"
#include "segflow/limit/semigroup.hpp"

namespace segflow {

// sup_z (1 ^ |z|) |F_n(z) - 1{z >= 0}|: the distance to a point mass at 0
// used when the limit variance vanishes.
double weighted_ks_degenerate(std::vector<double> xs);

struct CltReport {
  std::vector<double> times;
  std::vector<double> statistics;
  // Null standard deviation of the statistic (KS scale / sqrt(replicas)).
  double statistic_se = 0.0;
  double d_f = 0.0;
  bool degenerate = false;
  std::size_t replicas = 0;
  // Each statistic at most its predecessor plus 2 standard errors.
  bool non_increasing = false;
  // Samples of sqrt(t) A_t at the last time (for plotting / re-testing).
  std::vector<double> last_samples;
};

// Kolmogorov distance of sqrt(t) A_t^f(xi) to N(0, d_f^2) at each t
// (replica r on rng.child(r)); the weighted point-mass variant if d_f == 0.
CltReport clt_test(const SemigroupEvaluator& sg, const CenteredObservable& f,
                   const SegmentView& xi, std::span<const double> times, std::size_t replicas,
                   double d_f, const RngStream& rng);

} // namespace segflow
