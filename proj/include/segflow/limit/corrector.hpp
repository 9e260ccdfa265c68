#pragma once

#include <cmath>
#include <cstddef>
#include <optional>

#include "segflow/core/rng.hpp"
#include "segflow/core/stats.hpp"
#include "segflow/ergodic/ensemble.hpp"
#include "segflow/limit/semigroup.hpp"
#include "segflow/metric/metric.hpp"

namespace segflow {

struct CorrectorConfig {
  // Truncation caps; the effective horizon is the first grid point where the
  // fitted-rate tail per unit norm drops below tail_tolerance.
  double t_max = 6.0;
  std::size_t k_max = 6;
  double tail_tolerance = 1e-3;
  double quad_step = 1.0 / 32.0;
  std::size_t inner_replicas = 64;
  // Outer replicas of the one-step increment per state in phi estimates.
  std::size_t outer_replicas = 4;
  std::optional<RateFit> rate;
  MetricParams metric;

  void validate() const;
};

struct CorrectorResult {
  double value = 0.0;
  double se = 0.0;
  double tail_bound = 0.0;
  double horizon = 0.0;
};

// Truncated horizons implied by cfg.rate; throw ConfigError without a rate.
double corrector_horizon(const CorrectorConfig& cfg);
std::size_t discrete_horizon(const CorrectorConfig& cfg);

// R_f(xi) = int_0^T P_t f(xi) dt by the trapezoid rule on quad_step, the same
// inner_replicas paths serving every quadrature node.
CorrectorResult corrector(const SemigroupEvaluator& sg, const CenteredObservable& f,
                          const SegmentView& xi, const CorrectorConfig& cfg, const RngStream& rng);

// R^_f(xi) = sum_{k=0}^{K} P_k f(xi).
CorrectorResult discrete_corrector(const SemigroupEvaluator& sg, const CenteredObservable& f,
                                   const SegmentView& xi, const CorrectorConfig& cfg,
                                   const RngStream& rng);

enum class IncrementKind {
  // int_0^1 f(X_r) dr + R_f(X_1) - R_f(xi)
  continuous,
  // f(xi) + R^_f(X_1) - R^_f(xi)
  discrete,
};

// Corrector estimate at one state with its own estimation variance. For the
// discrete kind `value` is sum_{k>=1} P_k f, i.e. R^_f - f.
struct CorrectorSample {
  double value = 0.0;
  double variance = 0.0;
};
CorrectorSample corrector_sample(const SemigroupEvaluator& sg, const Observable& f,
                                 const SegmentView& xi, IncrementKind kind,
                                 const CorrectorConfig& cfg, const RngStream& rng);

// E |increment|^2 from xi. Inner-estimator variance is subtracted so the
// estimate is unbiased for finite inner_replicas.
struct PhiResult {
  Estimate phi;
  // f(xi) * corrector(xi) terms used by the stationary cross-check.
  double f_at_xi = 0.0;
  CorrectorSample corrector_at_xi;
};
PhiResult phi_sample(const SemigroupEvaluator& sg, const CenteredObservable& f,
                     const SegmentView& xi, IncrementKind kind, const CorrectorConfig& cfg,
                     const RngStream& rng);

Estimate phi_f(const SemigroupEvaluator& sg, const CenteredObservable& f, const SegmentView& xi,
               const CorrectorConfig& cfg, const RngStream& rng);
Estimate phi_hat_f(const SemigroupEvaluator& sg, const CenteredObservable& f,
                   const SegmentView& xi, const CorrectorConfig& cfg, const RngStream& rng);

struct VarianceReport {
  IncrementKind kind = IncrementKind::continuous;
  // mu(phi), the squared limit variance.
  Estimate d2;
  // 2 mu(f R_f) (continuous) or 2 mu(f R^_f) - mu(f^2) (discrete).
  Estimate cross_check;
  // Standard error of the paired difference and the discrepancy in its units.
  double diff_se = 0.0;
  double discrepancy_z = 0.0;
  std::size_t atoms = 0;

  double d() const { return d2.value > 0.0 ? std::sqrt(d2.value) : 0.0; }
};

// Stationary average of phi over the atoms (atom a uses rng.child(a)).
// Throws EstimatorInconsistency when D^2 is negative beyond 2 standard errors.
VarianceReport variance_D(const SemigroupEvaluator& sg, const CenteredObservable& f,
                          const EmpiricalMeasure& stationary, IncrementKind kind,
                          const CorrectorConfig& cfg, const RngStream& rng);

struct VphReport {
  Estimate residual;
  Estimate phi;
  Estimate p1_r2;
  Estimate r2;
  Estimate integral_term;
};

// phi_f(xi) - [P_1(R^2)(xi) - R(xi)^2 + 2 int_0^1 P_s(f R)(xi) ds], estimated
// path by path so that shared noise cancels in the residual.
VphReport vph_residual(const SemigroupEvaluator& sg, const CenteredObservable& f,
                       const SegmentView& xi, std::size_t outer_replicas,
                       const CorrectorConfig& cfg, const RngStream& rng);

} // namespace segflow
