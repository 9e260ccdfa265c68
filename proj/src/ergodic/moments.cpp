#include "segflow/ergodic/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "segflow/core/errors.hpp"
#include "segflow/core/parallel.hpp"
#include "segflow/core/trajectory.hpp"

namespace segflow {

double MomentCurve::envelope_at(double t, double xi_norm_p) const {
  return c_hat * (1.0 + std::exp(-beta_hat * t) * xi_norm_p);
}

MomentCurve moment_curve(const ModelSpec& model, const Segment& initial, double p,
                         std::span<const double> times, const EnsembleConfig& cfg,
                         double envelope_factor) {
  cfg.validate();
  if (!(p >= 1.0)) throw RangeError("moment_curve: p must be >= 1");
  if (times.empty()) throw RangeError("moment_curve: empty time grid");
  const double step = initial.shape().step;
  std::vector<std::size_t> steps(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    steps[k] = grid_steps(times[k], step, "moment time");
    if (k > 0 && steps[k] <= steps[k - 1]) throw RangeError("moment_curve: times must increase");
  }
  const RngStream root = stage_stream(cfg.master_seed, stage::moments);
  std::vector<double> raw(cfg.n_traj * times.size());
  parallel::parallel_for(cfg.n_traj, [&](std::size_t i) {
    EulerPath path(model, initial, root.child(i));
    for (std::size_t k = 0; k < steps.size(); ++k) {
      path.advance(steps[k] - path.steps_taken());
      raw[k * cfg.n_traj + i] = std::pow(sup_norm(path.current()), p);
    }
  });

  MomentCurve mc;
  mc.p = p;
  mc.envelope_factor = envelope_factor;
  mc.times.assign(times.begin(), times.end());
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Estimate e = mean_estimate(std::span<const double>(raw).subspan(k * cfg.n_traj, cfg.n_traj));
    mc.values.push_back(e.value);
    mc.std_errors.push_back(e.se);
  }

  const double xi_p = std::pow(sup_norm(initial), p);
  // Tightest dominating envelope: for each beta on a log grid, the smallest c
  // that puts every point under it; keep the beta with the least total log gap.
  std::vector<std::size_t> pos;
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (mc.values[k] > 0.0 && std::isfinite(mc.values[k])) pos.push_back(k);
  }
  if (!pos.empty()) {
    double best_gap = std::numeric_limits<double>::infinity();
    constexpr int kGrid = 601;
    for (int g = 0; g < kGrid; ++g) {
      const double beta = std::pow(10.0, -3.0 + 5.0 * g / (kGrid - 1));
      double log_c = -std::numeric_limits<double>::infinity();
      for (std::size_t k : pos) {
        log_c = std::max(log_c, std::log(mc.values[k]) - std::log1p(std::exp(-beta * times[k]) * xi_p));
      }
      double gap = 0.0;
      for (std::size_t k : pos) {
        gap += log_c + std::log1p(std::exp(-beta * times[k]) * xi_p) - std::log(mc.values[k]);
      }
      if (gap < best_gap) {
        best_gap = gap;
        mc.beta_hat = beta;
        mc.c_hat = std::exp(log_c);
      }
    }
  }

  mc.bounded = true;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double env = mc.envelope_at(times[k], xi_p);
    mc.envelope.push_back(env);
    if (!std::isfinite(mc.values[k]) || mc.values[k] > envelope_factor * env + 3.0 * mc.std_errors[k]) {
      mc.bounded = false;
    }
  }
  return mc;
}

ExpMomentProbe exp_moment_probe(const ModelSpec& model, const Segment& initial,
                                std::span<const double> delta_grid, std::size_t window_count,
                                const EnsembleConfig& cfg) {
  cfg.validate();
  if (window_count == 0) throw RangeError("exp_moment_probe: window_count must be >= 1");
  const double step = initial.shape().step;
  const std::size_t per_unit = grid_steps(1.0, step, "unit window");
  const std::size_t n = cfg.n_traj;
  const RngStream root = stage_stream(cfg.master_seed, stage::exp_moments);

  // s[k*n + i]: sup over segments X_t, t in [k, k+1], of ||X_t||^2 for path i.
  std::vector<double> s(window_count * n);
  parallel::parallel_for(n, [&](std::size_t i) {
    EulerPath path(model, initial, root.child(i));
    for (std::size_t k = 0; k < window_count; ++k) {
      path.advance(k * per_unit - path.steps_taken());
      double m = sup_norm(path.current());
      for (std::size_t j = 0; j < per_unit; ++j) {
        path.advance(1);
        double sq = 0.0;
        for (std::size_t c = 0; c < model.dim(); ++c) sq += path.now(c) * path.now(c);
        m = std::max(m, std::sqrt(sq));
      }
      s[k * n + i] = m * m;
    }
  });

  ExpMomentProbe out;
  out.deltas.assign(delta_grid.begin(), delta_grid.end());
  for (double delta : delta_grid) {
    if (!(delta > 0.0)) throw RangeError("exp_moment_probe: deltas must be positive");
    double worst_log = -std::numeric_limits<double>::infinity();
    double worst_share = 0.0;
    for (std::size_t k = 0; k < window_count; ++k) {
      const auto w = std::span<const double>(s).subspan(k * n, n);
      const double top = delta * *std::max_element(w.begin(), w.end());
      double acc = 0.0;
      for (double v : w) acc += std::exp(delta * v - top);
      const double log_sum = top + std::log(acc);
      worst_log = std::max(worst_log, log_sum - std::log(static_cast<double>(n)));
      worst_share = std::max(worst_share, 1.0 / acc);
    }
    out.log_estimates.push_back(worst_log);
    out.max_share.push_back(worst_share);
    const bool ok = worst_log < std::log(std::numeric_limits<double>::max()) && worst_share < 0.5;
    out.passed.push_back(ok);
    if (ok && (!out.largest_passing || delta > *out.largest_passing)) out.largest_passing = delta;
  }
  return out;
}

} // namespace segflow
