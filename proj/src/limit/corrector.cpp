#include "segflow/limit/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "segflow/core/errors.hpp"
#include "segflow/core/parallel.hpp"
#include "segflow/core/trajectory.hpp"

namespace segflow {

void CorrectorConfig::validate() const {
  if (!(t_max > 0.0)) throw ConfigError("corrector.t_max must be positive");
  if (k_max == 0) throw ConfigError("corrector.k_max must be >= 1");
  if (!(tail_tolerance > 0.0)) throw ConfigError("corrector.tail_tolerance must be positive");
  if (!(quad_step > 0.0)) throw ConfigError("corrector.quad_step must be positive");
  if (inner_replicas < 2) throw ConfigError("corrector.inner_replicas must be >= 2");
  if (outer_replicas == 0) throw ConfigError("corrector.outer_replicas must be >= 1");
  metric.validate();
}

namespace {

const RateFit& require_rate(const CorrectorConfig& cfg) {
  if (!cfg.rate) throw ConfigError("corrector truncation needs a fitted ergodicity rate");
  const RateFit& r = *cfg.rate;
  if (!(r.beta_hat > 0.0) || !(r.c_hat > 0.0)) {
    throw ConfigError("corrector truncation needs a decaying rate fit (beta_hat > 0, c_hat > 0)");
  }
  return r;
}

double tail_per_unit(const RateFit& r, double t) {
  return r.c_hat * std::exp(-r.beta_hat * t) / r.beta_hat;
}

double discrete_tail_per_unit(const RateFit& r, std::size_t k) {
  return r.c_hat * std::exp(-r.beta_hat * static_cast<double>(k)) / (1.0 - std::exp(-r.beta_hat));
}

double norm_scale(const CenteredObservable& f, const MetricParams& mp) {
  return f.norm_bound(mp).value_or(1.0);
}

double trapezoid(std::span<const double> v, double h) {
  if (v.size() < 2) return 0.0;
  double s = 0.5 * (v.front() + v.back());
  for (std::size_t i = 1; i + 1 < v.size(); ++i) s += v[i];
  return s * h;
}

} // namespace

double corrector_horizon(const CorrectorConfig& cfg) {
  const RateFit& r = require_rate(cfg);
  const double h = cfg.quad_step;
  const double cap = std::max(h, std::floor(cfg.t_max / h + 1e-9) * h);
  const double need = std::log(r.c_hat / (r.beta_hat * cfg.tail_tolerance)) / r.beta_hat;
  const double t = std::ceil(need / h - 1e-9) * h;
  return std::clamp(t, h, cap);
}

std::size_t discrete_horizon(const CorrectorConfig& cfg) {
  const RateFit& r = require_rate(cfg);
  const double need =
      std::log(r.c_hat / ((1.0 - std::exp(-r.beta_hat)) * cfg.tail_tolerance)) / r.beta_hat;
  const double k = std::ceil(need - 1e-9);
  if (!(k >= 1.0)) return 1;
  return std::min(cfg.k_max, static_cast<std::size_t>(k));
}

CorrectorSample corrector_sample(const SemigroupEvaluator& sg, const Observable& f,
                                 const SegmentView& xi, IncrementKind kind,
                                 const CorrectorConfig& cfg, const RngStream& rng) {
  const bool cont = kind == IncrementKind::continuous;
  const double obs = cont ? cfg.quad_step : 1.0;
  const std::size_t n = cont ? grid_steps(corrector_horizon(cfg), obs, "corrector horizon")
                             : discrete_horizon(cfg);
  // Continuous: trapezoid over [0, T]. Discrete: sum over k = 1..K.
  const auto reduce = [&](std::span<const double> v) {
    if (cont) return trapezoid(v, obs);
    double s = 0.0;
    for (std::size_t k = 1; k < v.size(); ++k) s += v[k];
    return s;
  };
  if (auto ex = sg.exact_series(f, xi, obs, n)) return {reduce(*ex), 0.0};

  const std::size_t R = cfg.inner_replicas;
  std::vector<double> vals(R), series(n + 1);
  for (std::size_t r = 0; r < R; ++r) {
    sg.walk(xi, obs, n, rng.child(r), [&](std::size_t k, const SegmentView& x) { series[k] = f(x); });
    vals[r] = reduce(series);
  }
  const Estimate e = mean_estimate(vals);
  return {e.value, e.se * e.se};
}

CorrectorResult corrector(const SemigroupEvaluator& sg, const CenteredObservable& f,
                          const SegmentView& xi, const CorrectorConfig& cfg, const RngStream& rng) {
  cfg.validate();
  const RateFit& rate = require_rate(cfg);
  CorrectorResult out;
  out.horizon = corrector_horizon(cfg);
  const CorrectorSample s =
      corrector_sample(sg, f.as_observable(), xi, IncrementKind::continuous, cfg, rng);
  out.value = s.value;
  const double centering = out.horizon * f.mu_f_se;
  out.se = std::sqrt(s.variance + centering * centering);
  out.tail_bound = norm_scale(f, cfg.metric) * tail_per_unit(rate, out.horizon);
  return out;
}

CorrectorResult discrete_corrector(const SemigroupEvaluator& sg, const CenteredObservable& f,
                                   const SegmentView& xi, const CorrectorConfig& cfg,
                                   const RngStream& rng) {
  cfg.validate();
  const RateFit& rate = require_rate(cfg);
  const std::size_t K = discrete_horizon(cfg);
  const Observable fc = f.as_observable();
  const CorrectorSample s = corrector_sample(sg, fc, xi, IncrementKind::discrete, cfg, rng);
  CorrectorResult out;
  out.horizon = static_cast<double>(K);
  out.value = fc(xi) + s.value;
  const double centering = static_cast<double>(K + 1) * f.mu_f_se;
  out.se = std::sqrt(s.variance + centering * centering);
  out.tail_bound = norm_scale(f, cfg.metric) * discrete_tail_per_unit(rate, K);
  return out;
}

namespace {

// One outer path from xi: the additive piece of the increment and X_1.
struct OuterStep {
  double g = 0.0;
  std::optional<Segment> x1;
};

OuterStep outer_step(const SemigroupEvaluator& sg, const Observable& f, const SegmentView& xi,
                     IncrementKind kind, const CorrectorConfig& cfg, const RngStream& rng) {
  OuterStep out;
  if (kind == IncrementKind::continuous) {
    const double h = cfg.quad_step;
    const std::size_t n1 = grid_steps(1.0, h, "unit time");
    std::vector<double> v(n1 + 1);
    sg.walk(xi, h, n1, rng, [&](std::size_t k, const SegmentView& x) {
      v[k] = f(x);
      if (k == n1) out.x1.emplace(Segment::from_view(x));
    });
    out.g = trapezoid(v, h);
  } else {
    sg.walk(xi, 1.0, 1, rng, [&](std::size_t k, const SegmentView& x) {
      if (k == 1) {
        out.g = f(x);
        out.x1.emplace(Segment::from_view(x));
      }
    });
  }
  return out;
}

} // namespace

PhiResult phi_sample(const SemigroupEvaluator& sg, const CenteredObservable& f,
                     const SegmentView& xi, IncrementKind kind, const CorrectorConfig& cfg,
                     const RngStream& rng) {
  cfg.validate();
  const Observable fc = f.as_observable();
  PhiResult out;
  out.f_at_xi = fc(xi);
  out.corrector_at_xi = corrector_sample(sg, fc, xi, kind, cfg, rng.child(0));
  const CorrectorSample& c0 = out.corrector_at_xi;

  const std::size_t J = cfg.outer_replicas;
  std::vector<double> terms(J);
  parallel::parallel_for(J, [&](std::size_t j) {
    const OuterStep step = outer_step(sg, fc, xi, kind, cfg, rng.child(1).child(j));
    const CorrectorSample c1 = corrector_sample(sg, fc, *step.x1, kind, cfg, rng.child(2).child(j));
    const double y = step.g + c1.value - c0.value;
    terms[j] = y * y - c1.variance;
  });
  out.phi = mean_estimate(terms);
  out.phi.value -= c0.variance;
  return out;
}

Estimate phi_f(const SemigroupEvaluator& sg, const CenteredObservable& f, const SegmentView& xi,
               const CorrectorConfig& cfg, const RngStream& rng) {
  return phi_sample(sg, f, xi, IncrementKind::continuous, cfg, rng).phi;
}

Estimate phi_hat_f(const SemigroupEvaluator& sg, const CenteredObservable& f,
                   const SegmentView& xi, const CorrectorConfig& cfg, const RngStream& rng) {
  return phi_sample(sg, f, xi, IncrementKind::discrete, cfg, rng).phi;
}

VarianceReport variance_D(const SemigroupEvaluator& sg, const CenteredObservable& f,
                          const EmpiricalMeasure& stationary, IncrementKind kind,
                          const CorrectorConfig& cfg, const RngStream& rng) {
  cfg.validate();
  const std::size_t n = stationary.size();
  std::vector<double> phi(n), cross(n), diff(n);
  parallel::parallel_for(n, [&](std::size_t a) {
    const PhiResult r = phi_sample(sg, f, stationary[a], kind, cfg, rng.child(a));
    const double fx = r.f_at_xi;
    const double c = r.corrector_at_xi.value;
    phi[a] = r.phi.value;
    // Discrete: 2 f R^ - f^2 with R^ = f + c.
    cross[a] = kind == IncrementKind::continuous ? 2.0 * fx * c : fx * fx + 2.0 * fx * c;
    diff[a] = phi[a] - cross[a];
  });
  VarianceReport rep;
  rep.kind = kind;
  rep.atoms = n;
  rep.d2 = mean_estimate(phi);
  rep.cross_check = mean_estimate(cross);
  const Estimate d = mean_estimate(diff);
  rep.diff_se = d.se;
  rep.discrepancy_z = d.se > 0.0 ? d.value / d.se : 0.0;
  if (rep.d2.value < -2.0 * rep.d2.se) {
    throw EstimatorInconsistency("variance estimate is negative beyond two standard errors (" +
                                 std::to_string(rep.d2.value) + " +- " +
                                 std::to_string(rep.d2.se) + ")");
  }
  return rep;
}

VphReport vph_residual(const SemigroupEvaluator& sg, const CenteredObservable& f,
                       const SegmentView& xi, std::size_t outer_replicas,
                       const CorrectorConfig& cfg, const RngStream& rng) {
  cfg.validate();
  if (outer_replicas < 2) throw RangeError("vph_residual needs at least two outer replicas");
  const Observable fc = f.as_observable();
  const double h = cfg.quad_step;
  const std::size_t n1 = grid_steps(1.0, h, "unit time");
  const std::size_t nT = grid_steps(corrector_horizon(cfg), h, "corrector horizon");
  const CorrectorSample c0 = corrector_sample(sg, fc, xi, IncrementKind::continuous, cfg, rng.child(0));

  const std::size_t J = outer_replicas;
  std::vector<double> res(J), phi(J), p1(J), integral(J);
  parallel::parallel_for(J, [&](std::size_t j) {
    std::vector<double> v(n1 + nT + 1);
    std::optional<Segment> x1;
    sg.walk(xi, h, n1 + nT, rng.child(1).child(j), [&](std::size_t k, const SegmentView& x) {
      v[k] = fc(x);
      if (k == n1) x1.emplace(Segment::from_view(x));
    });
    const double a = trapezoid(std::span<const double>(v).first(n1 + 1), h);
    // prefix[i] = v[0] + ... + v[i-1]
    std::vector<double> prefix(v.size() + 1, 0.0);
    for (std::size_t i = 0; i < v.size(); ++i) prefix[i + 1] = prefix[i] + v[i];
    // int_0^1 f(X_s) int_s^{s+T} f(X_u) du ds, both by the trapezoid rule.
    std::vector<double> tower(n1 + 1);
    for (std::size_t k = 0; k <= n1; ++k) {
      const double inner = h * (0.5 * v[k] + (prefix[k + nT] - prefix[k + 1]) + 0.5 * v[k + nT]);
      tower[k] = v[k] * inner;
    }
    const double tw = trapezoid(tower, h);
    const CorrectorSample c1 =
        corrector_sample(sg, fc, *x1, IncrementKind::continuous, cfg, rng.child(2).child(j));
    const double y = a + c1.value - c0.value;
    phi[j] = y * y - c1.variance;
    p1[j] = c1.value * c1.value - c1.variance;
    integral[j] = 2.0 * tw;
    res[j] = y * y - c1.value * c1.value - 2.0 * tw;
  });

  VphReport rep;
  rep.phi = mean_estimate(phi);
  rep.phi.value -= c0.variance;
  rep.p1_r2 = mean_estimate(p1);
  rep.integral_term = mean_estimate(integral);
  rep.r2 = {c0.value * c0.value - c0.variance, 2.0 * std::fabs(c0.value) * std::sqrt(c0.variance)};
  const Estimate r = mean_estimate(res);
  rep.residual.value = r.value + c0.value * c0.value - 2.0 * c0.variance;
  const double shared = 2.0 * c0.value;
  rep.residual.se = std::sqrt(r.se * r.se + shared * shared * c0.variance);
  return rep;
}

} // namespace segflow
