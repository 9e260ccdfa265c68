#pragma once

#include <cstddef>
#include <vector>

#include "segflow/core/rng.hpp"
#include "segflow/core/stats.hpp"
#include "segflow/limit/corrector.hpp"
#include "segflow/limit/semigroup.hpp"

namespace segflow {

// Z_k = f(X_k) + Rt(X_k) - Rt(X_{k-1}) with Rt = sum_{j>=1} P_j f = R^_f - f,
// along one unit-time path (path on rng.child(0), Rt at X_k on
// rng.child(1).child(k)).
struct MartingaleIncrements {
  std::vector<double> z;
  std::vector<double> partial_sums;
  std::vector<double> f_values;
  // Rt(X_k) for k = 0..n and the variance of each estimate.
  std::vector<double> tail;
  std::vector<double> tail_variance;

  // (1/n) sum Z_k^2 with inner-estimator variance removed; batch-means error.
  Estimate mean_square(std::size_t batches = 16) const;
};

MartingaleIncrements martingale_increments(const SemigroupEvaluator& sg,
                                           const CenteredObservable& f, const SegmentView& xi,
                                           std::size_t n, const CorrectorConfig& cfg,
                                           const RngStream& rng);

// sum_{k=1}^n Z_k = sum_{k=1}^n f(X_k) + Rt(X_n) - Rt(X_0).
double telescoped_sum(const MartingaleIncrements& m);

enum class QvKind { continuous, discrete };

struct QuadraticVariation {
  QvKind kind = QvKind::discrete;
  std::size_t k = 0;
  // phi (or phi-hat) at X_0, ..., X_{k-1}.
  std::vector<double> terms;
  double sum = 0.0;
  // sum / k with an error bar covering path and estimator noise.
  Estimate per_step;
};

// <M>_k = sum_{i<k} phi(X_i) along one unit-time path (path on rng.child(0),
// phi at X_i on rng.child(1 + i)); k = 1 reproduces phi at xi on rng.child(1).
QuadraticVariation quadratic_variation(const SemigroupEvaluator& sg, const CenteredObservable& f,
                                       const SegmentView& xi, std::size_t k, QvKind kind,
                                       const CorrectorConfig& cfg, const RngStream& rng,
                                       std::size_t batches = 16);

struct QvLlnReport {
  std::size_t n = 0;
  // (1/n) sum Z_k^2 along one path.
  Estimate mean_square;
  // E (sum Z)^2 / n over sum_replicas paths.
  Estimate s_n2_over_n;
  Estimate d_hat2;
  double z_mean_square = 0.0;
  double z_s_n2 = 0.0;
  bool zero_signal = false;
  bool pass = false;
};

// Both ratios against d_hat2, each within 3 joint standard errors.
QvLlnReport qv_lln_check(const SemigroupEvaluator& sg, const CenteredObservable& f,
                         const SegmentView& xi, std::size_t n, const Estimate& d_hat2,
                         std::size_t sum_replicas, const CorrectorConfig& cfg,
                         const RngStream& rng);

} // namespace segflow
