#include "segflow/ergodic/ensemble.hpp"

#include <algorithm>
#include <cmath>

#include "segflow/core/errors.hpp"
#include "segflow/core/parallel.hpp"
#include "segflow/core/trajectory.hpp"

namespace segflow {

void EnsembleConfig::validate() const {
  if (n_traj == 0) throw RangeError("ensemble.n_traj must be >= 1");
  if (!(step > 0.0)) throw RangeError("ensemble.step must be positive");
  if (burn_in && !(*burn_in >= 0.0)) throw RangeError("ensemble.burn_in must be >= 0");
  if (!(thinning >= step * (1.0 - 1e-12))) throw RangeError("ensemble.thinning must be >= step");
  if (samples_per_traj == 0) throw RangeError("ensemble.samples_per_traj must be >= 1");
}

double EnsembleConfig::effective_burn_in(const ModelSpec& model) const {
  return burn_in ? *burn_in : 10.0 / model.lambda1();
}

RngStream stage_stream(std::uint64_t master_seed, std::uint64_t stage) {
  return RngStream(master_seed, 0).child(stage);
}

EmpiricalMeasure sample_invariant(const ModelSpec& model, const EnsembleConfig& cfg,
                                  const Segment& initial) {
  cfg.validate();
  const double step = initial.shape().step;
  if (std::fabs(step - cfg.step) > 1e-15 * step) {
    throw ShapeError("sample_invariant: initial segment grid differs from ensemble step");
  }
  // Round burn-in up to the grid so a default 10/lambda1 need not be a multiple of dt.
  const auto burn = static_cast<std::size_t>(std::ceil(cfg.effective_burn_in(model) / step - 1e-9));
  const std::size_t thin = grid_steps(cfg.thinning, step, "thinning");
  const RngStream root = stage_stream(cfg.master_seed, stage::invariant);
  const std::size_t per = cfg.samples_per_traj;

  std::vector<std::vector<Segment>> per_traj(cfg.n_traj);
  parallel::parallel_for(cfg.n_traj, [&](std::size_t i) {
    EulerPath path(model, initial, root.child(i));
    path.advance(burn);
    auto& out = per_traj[i];
    out.reserve(per);
    for (std::size_t s = 0; s < per; ++s) {
      if (s > 0) path.advance(thin);
      out.push_back(Segment::from_view(path.current()));
    }
  });
  std::vector<Segment> atoms;
  atoms.reserve(cfg.n_traj * per);
  for (auto& v : per_traj) {
    for (auto& s : v) atoms.push_back(std::move(s));
  }
  return EmpiricalMeasure(std::move(atoms));
}

Estimate stationary_average(const ModelSpec& model, const Observable& f, const Segment& initial,
                            const TimeAverageConfig& cfg) {
  if (cfg.n_traj < 2) throw RangeError("stationary_average needs at least two paths");
  const double step = initial.shape().step;
  const std::size_t burn = grid_steps(cfg.burn_in, step, "burn_in");
  const std::size_t n = grid_steps(cfg.horizon, step, "horizon");
  if (n == 0) throw RangeError("stationary_average: horizon must be positive");
  const RngStream root = stage_stream(cfg.master_seed, stage::time_average);
  std::vector<double> means(cfg.n_traj);
  parallel::parallel_for(cfg.n_traj, [&](std::size_t i) {
    EulerPath path(model, initial, root.child(i));
    path.advance(burn);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      path.advance(1);
      s += f(path.current());
    }
    means[i] = s / static_cast<double>(n);
  });
  return mean_estimate(means);
}

double RateFit::at(double t) const { return c_hat * std::exp(-beta_hat * t); }

RateFit fit_rate(std::span<const double> times, std::span<const double> values) {
  if (times.size() != values.size()) throw ShapeError("fit_rate: times and values differ in length");
  RateFit r;
  std::vector<double> logs;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (values[i] > 0.0 && std::isfinite(values[i])) {
      if (!r.times.empty() && !(times[i] > r.times.back())) {
        throw RangeError("fit_rate: times must be strictly increasing");
      }
      r.times.push_back(times[i]);
      r.values.push_back(values[i]);
      logs.push_back(std::log(values[i]));
    }
  }
  if (r.times.size() < 2) return r;
  const LineFit lf = fit_line(r.times, logs);
  r.c_hat = std::exp(lf.intercept);
  r.beta_hat = -lf.slope;
  r.beta_se = lf.slope_se;
  r.r_squared = lf.r_squared;
  return r;
}

namespace {

// Snapshots of n paths at the requested grid steps: out[t][i].
std::vector<std::vector<Segment>> snapshots(const ModelSpec& model,
                                            const std::function<const Segment&(std::size_t)>& start,
                                            std::size_t n, std::span<const std::size_t> steps,
                                            const RngStream& root) {
  std::vector<std::vector<std::optional<Segment>>> tmp(steps.size(),
                                                       std::vector<std::optional<Segment>>(n));
  parallel::parallel_for(n, [&](std::size_t i) {
    EulerPath path(model, start(i), root.child(i));
    for (std::size_t k = 0; k < steps.size(); ++k) {
      path.advance(steps[k] - path.steps_taken());
      tmp[k][i].emplace(Segment::from_view(path.current()));
    }
  });
  std::vector<std::vector<Segment>> out(steps.size());
  for (std::size_t k = 0; k < steps.size(); ++k) {
    out[k].reserve(n);
    for (auto& s : tmp[k]) out[k].push_back(std::move(*s));
  }
  return out;
}

EmpiricalMeasure block_of(const std::vector<Segment>& v, std::size_t block, std::size_t size) {
  return EmpiricalMeasure(std::vector<Segment>(v.begin() + static_cast<std::ptrdiff_t>(block * size),
                                               v.begin() + static_cast<std::ptrdiff_t>((block + 1) * size)));
}

} // namespace

ErgodicityCurve ergodicity_curve(const ModelSpec& model, const Segment& initial_a,
                                 const EmpiricalMeasure& initial_b, std::span<const double> times,
                                 const MetricParams& mp, const EnsembleConfig& cfg,
                                 const CurveOptions& opts) {
  cfg.validate();
  mp.validate();
  if (times.empty()) throw RangeError("ergodicity_curve: empty time grid");
  if (!(initial_a.shape() == initial_b.shape())) {
    throw ShapeError("ergodicity_curve: initial law and reference sample live on different grids");
  }
  const double step = initial_a.shape().step;
  std::vector<std::size_t> steps(times.size());
  for (std::size_t k = 0; k < times.size(); ++k) {
    steps[k] = grid_steps(times[k], step, "ergodicity time");
    if (k > 0 && steps[k] <= steps[k - 1]) throw RangeError("ergodicity_curve: times must increase");
  }

  const std::size_t n = cfg.n_traj;
  const std::size_t block = std::min(n, opts.transport.cap);
  const std::size_t n_blocks = n / block;
  const std::size_t nb = initial_b.size();

  ErgodicityCurve out;
  out.mode = opts.mode;
  out.times.assign(times.begin(), times.end());
  out.blocks = n_blocks;

  const RngStream root = stage_stream(cfg.master_seed, stage::curve);
  const auto a = snapshots(model, [&](std::size_t) -> const Segment& { return initial_a; }, n, steps, root);
  std::vector<std::vector<Segment>> b;
  if (opts.mode == CurveMode::coupled) {
    b = snapshots(model, [&](std::size_t i) -> const Segment& { return initial_b[i % nb]; }, n, steps, root);
  } else {
    if (nb < block) {
      throw RangeError("ergodicity_curve: stationary sample has " + std::to_string(nb) +
                       " atoms, fewer than the block size " + std::to_string(block));
    }
    if (nb >= 2 * block) {
      out.noise_floor = wasserstein(initial_b.slice(0, block), initial_b.slice(block, block), mp,
                                    opts.transport);
    }
  }

  for (std::size_t k = 0; k < times.size(); ++k) {
    std::vector<double> per_block(n_blocks);
    for (std::size_t j = 0; j < n_blocks; ++j) {
      const EmpiricalMeasure ea = block_of(a[k], j, block);
      if (opts.mode == CurveMode::coupled) {
        per_block[j] = wasserstein(ea, block_of(b[k], j, block), mp, opts.transport);
      } else {
        const std::size_t jb = j % (nb / block);
        per_block[j] = wasserstein(ea, initial_b.slice(jb * block, block), mp, opts.transport);
      }
    }
    const Estimate e = mean_estimate(per_block);
    out.distances.push_back(e.value);
    out.std_errors.push_back(e.se);
  }

  std::vector<double> ft, fv;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double w = out.distances[k];
    char ok = 1;
    if (!(w > 0.0)) {
      ++out.dropped_nonpositive;
      ok = 0;
    } else if (w <= 2.0 * out.noise_floor) {
      ++out.dropped_floor;
      ok = 0;
    }
    out.usable.push_back(ok);
    if (ok) {
      ft.push_back(times[k]);
      fv.push_back(w);
    }
  }
  out.fit = fit_rate(ft, fv);
  out.flat = out.fit.times.size() < 3 || !(out.fit.beta_hat > 2.0 * out.fit.beta_se);
  return out;
}

} // namespace segflow
