#include "segflow/limit/slln.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "segflow/core/errors.hpp"
#include "segflow/core/parallel.hpp"
#include "segflow/core/stats.hpp"

namespace segflow {

double additive_functional(const Trajectory& traj, const Observable& f, double t) {
  if (!(t > 0.0) || t > traj.horizon() * (1.0 + 1e-12)) {
    throw RangeError("additive_functional: t outside (0, horizon]");
  }
  const double h = traj.step();
  const auto full = static_cast<std::size_t>(std::floor(t / h + 1e-9));
  double s = 0.0;
  double prev = f(traj.window(0));
  for (std::size_t k = 1; k <= full; ++k) {
    const double cur = f(traj.window(k));
    s += 0.5 * (prev + cur) * h;
    prev = cur;
  }
  const double rest = t - static_cast<double>(full) * h;
  if (rest > 1e-9 * h) s += 0.5 * (prev + f(segment_at(traj, t))) * rest;
  return s / t;
}

std::vector<double> additive_series(const SemigroupEvaluator& sg, const Observable& f,
                                    const SegmentView& xi, std::span<const double> times,
                                    const RngStream& rng) {
  const double h = sg.time_step();
  std::vector<std::size_t> idx(times.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    idx[i] = grid_steps(times[i], h, "additive functional time");
    if (idx[i] == 0 || (i > 0 && idx[i] <= idx[i - 1])) {
      throw RangeError("additive_series: times must be positive and increasing");
    }
  }
  std::vector<double> out(times.size());
  double integral = 0.0, prev = 0.0;
  std::size_t next = 0;
  sg.walk(xi, h, idx.back(), rng, [&](std::size_t k, const SegmentView& x) {
    const double cur = f(x);
    if (k > 0) integral += 0.5 * (prev + cur) * h;
    prev = cur;
    while (next < idx.size() && idx[next] == k) {
      out[next] = integral / times[next];
      ++next;
    }
  });
  return out;
}

SllnReport slln_variance_decay(const SemigroupEvaluator& sg, const CenteredObservable& f,
                               const SegmentView& xi, std::span<const double> times,
                               std::size_t replicas, const RngStream& rng) {
  if (replicas < 100) throw RangeError("slln_variance_decay needs at least 100 replicas");
  if (times.size() < 4 || !(times.back() >= 10.0 * times.front())) {
    throw RangeError("slln_variance_decay needs >= 4 times spanning at least one decade");
  }
  const Observable fc = f.as_observable();
  const std::size_t nt = times.size();
  std::vector<double> sq(replicas * nt);
  parallel::parallel_for(replicas, [&](std::size_t r) {
    const auto a = additive_series(sg, fc, xi, times, rng.child(r));
    for (std::size_t i = 0; i < nt; ++i) sq[i * replicas + r] = a[i] * a[i];
  });

  SllnReport rep;
  rep.times.assign(times.begin(), times.end());
  for (std::size_t i = 0; i < nt; ++i) {
    const Estimate e = mean_estimate(std::span<const double>(sq).subspan(i * replicas, replicas));
    rep.sq_errors.push_back(e.value);
    rep.std_errors.push_back(e.se);
  }
  if (std::all_of(rep.sq_errors.begin(), rep.sq_errors.end(), [](double v) { return v == 0.0; })) {
    rep.zero_signal = true;
    return rep;
  }
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < nt; ++i) {
    if (rep.sq_errors[i] > 0.0) {
      lx.push_back(std::log(times[i]));
      ly.push_back(std::log(rep.sq_errors[i]));
    }
  }
  if (lx.size() < 4) throw NumericError("slln_variance_decay: fewer than four positive points");
  const LineFit lf = fit_line(lx, ly);
  rep.slope = lf.slope;
  rep.slope_se = lf.slope_se;
  rep.slope_lo = lf.slope - 1.96 * lf.slope_se;
  rep.slope_hi = lf.slope + 1.96 * lf.slope_se;
  rep.intercept = lf.intercept;
  rep.c_env = rep.sq_errors.back() * times.back();
  rep.pass = rep.slope <= -1.0 + 0.25;
  return rep;
}

double pathwise_statistic(std::span<const double> times, std::span<const double> abs_a, double eps) {
  double s = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    s = std::max(s, abs_a[i] * std::pow(times[i], 0.5 - eps));
  }
  return s;
}

PathwiseSummary slln_pathwise(const SemigroupEvaluator& sg, const CenteredObservable& f,
                              const SegmentView& xi, double eps, double horizon,
                              std::size_t replicas, const RngStream& rng,
                              std::size_t n_checkpoints) {
  if (!(eps > 0.0 && eps < 0.5)) throw RangeError("slln_pathwise: eps must lie in (0, 1/2)");
  if (replicas < 2) throw RangeError("slln_pathwise needs at least two replicas");
  if (n_checkpoints < 2) throw RangeError("slln_pathwise needs at least two checkpoints");
  const double h = sg.time_step();
  const std::size_t n_h = grid_steps(horizon, h, "horizon");
  const double t0 = std::min(1.0, horizon);

  // Geometric checkpoints from t0 to the horizon, snapped to the grid, plus
  // T/4 and T/2 so the late-window ratio is well defined.
  std::set<std::size_t> grid;
  for (std::size_t i = 0; i < n_checkpoints; ++i) {
    const double t = t0 * std::pow(horizon / t0, static_cast<double>(i) / double(n_checkpoints - 1));
    grid.insert(std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(t / h))));
  }
  grid.insert(std::max<std::size_t>(1, n_h / 4));
  grid.insert(std::max<std::size_t>(1, n_h / 2));
  grid.insert(n_h);
  PathwiseSummary out;
  out.eps = eps;
  out.horizon = horizon;
  for (std::size_t k : grid) out.checkpoints.push_back(static_cast<double>(k) * h);

  const Observable fc = f.as_observable();
  const std::size_t nc = out.checkpoints.size();
  std::vector<double> abs_a(replicas * nc);
  parallel::parallel_for(replicas, [&](std::size_t r) {
    const auto a = additive_series(sg, fc, xi, out.checkpoints, rng.child(r));
    for (std::size_t i = 0; i < nc; ++i) abs_a[r * nc + i] = std::fabs(a[i]);
  });

  const auto row = [&](std::size_t r) { return std::span<const double>(abs_a).subspan(r * nc, nc); };
  std::vector<double> final_stat(replicas);
  out.statistic.resize(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    out.statistic[r] = pathwise_statistic(out.checkpoints, row(r), eps);
    final_stat[r] = row(r)[nc - 1] * std::pow(horizon, 0.5 - eps);
  }
  out.zero_signal = std::all_of(out.statistic.begin(), out.statistic.end(), [](double v) { return v == 0.0; });
  out.c_eps = quantile(final_stat, 0.95);

  const double q4 = static_cast<double>(n_h / 4) * h, q2 = static_cast<double>(n_h / 2) * h;
  std::vector<double> ratios;
  out.last_violation.resize(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    double last = 0.0, early = 0.0, late = 0.0;
    const auto a = row(r);
    for (std::size_t i = 0; i < nc; ++i) {
      const double t = out.checkpoints[i];
      const double s = a[i] * std::pow(t, 0.5 - eps);
      if (s > out.c_eps) last = t;
      if (t >= q4 && t <= q2) early = std::max(early, s);
      if (t >= q2) late = std::max(late, s);
    }
    out.last_violation[r] = last;
    if (early > 0.0) ratios.push_back(late / early);
  }
  const double levels[] = {0.05, 0.25, 0.5, 0.75, 0.95};
  for (double q : levels) {
    out.statistic_quantiles.push_back(quantile(out.statistic, q));
    out.violation_quantiles.push_back(quantile(out.last_violation, q));
  }
  out.late_ratio_median = ratios.empty() ? 0.0 : quantile(ratios, 0.5);
  return out;
}

} // namespace segflow
