#include "segflow/core/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "segflow/core/errors.hpp"

namespace segflow {

namespace {

// Compaction threshold for long-running paths, in nodes beyond the window.
constexpr std::size_t kSlackNodes = 4096;

} // namespace

std::size_t grid_steps(double span, double step, const char* what) {
  const double n = std::round(span / step);
  if (!(n >= 0.0) || std::fabs(n * step - span) > 1e-9 * std::max(1.0, std::fabs(span))) {
    throw RangeError(std::string(what) + " = " + std::to_string(span) +
                     " is not a non-negative multiple of the time step");
  }
  return static_cast<std::size_t>(n);
}

Trajectory::Trajectory(std::string model_name, SegmentShape shape, double horizon,
                       std::vector<double> states, RngStream seed)
    : model_name_(std::move(model_name)), shape_(shape), horizon_(horizon),
      states_(std::move(states)), seed_(seed) {
  const std::size_t expected = (grid_steps(horizon, shape_.step, "horizon") + shape_.nodes());
  if (states_.size() != expected * shape_.dim) {
    throw ShapeError("trajectory has " + std::to_string(states_.size() / shape_.dim) +
                     " grid points, expected " + std::to_string(expected));
  }
  for (double v : states_) {
    if (!std::isfinite(v)) throw NumericError("trajectory contains non-finite states");
  }
}

SegmentView Trajectory::window(std::size_t k) const {
  const std::size_t d = shape_.dim;
  return SegmentView(shape_, std::span<const double>(states_).subspan(k * d, shape_.size()));
}

Segment segment_at(const Trajectory& traj, double t) {
  if (!(t >= 0.0) || t > traj.horizon() * (1.0 + 1e-12)) {
    throw RangeError("segment_at: t=" + std::to_string(t) + " outside [0, " +
                     std::to_string(traj.horizon()) + "]");
  }
  const auto& shape = traj.shape();
  const double pos = t / shape.step;
  const double k = std::round(pos);
  const std::size_t last_step = traj.grid_points() - shape.nodes();
  if (std::fabs(pos - k) <= 1e-9 * std::max(1.0, pos)) {
    return Segment::from_view(traj.window(std::min(static_cast<std::size_t>(k), last_step)));
  }
  // Off-grid: node i of X_t sits at absolute time t - r0 + i*dt, between grid
  // points floor(pos) + i and floor(pos) + i + 1 (in trajectory index space).
  const auto base = static_cast<std::size_t>(std::floor(pos));
  const double w = pos - static_cast<double>(base);
  const std::size_t d = shape.dim;
  std::vector<double> values(shape.size());
  for (std::size_t i = 0; i < shape.nodes(); ++i) {
    const std::size_t lo = base + i;
    const std::size_t hi = std::min(lo + 1, traj.grid_points() - 1);
    for (std::size_t j = 0; j < d; ++j) {
      values[i * d + j] = (1.0 - w) * traj.state(lo, j) + w * traj.state(hi, j);
    }
  }
  return Segment(shape, std::move(values));
}

EulerPath::EulerPath(const ModelSpec& model, const Segment& initial, RngStream rng,
                     bool keep_history)
    : model_(&model), shape_(initial.shape()), dim_(initial.shape().dim), noise_(rng),
      keep_history_(keep_history), drift_(dim_), diff_(dim_ * dim_), z_(dim_),
      sqrt_dt_(std::sqrt(initial.shape().step)) {
  if (shape_.dim != model.dim() || std::fabs(shape_.delay - model.delay()) > 1e-12 * model.delay()) {
    throw ShapeError("initial segment is incompatible with model '" + model.name() + "'");
  }
  buf_.reserve(shape_.size() + (keep_history_ ? 0 : kSlackNodes * dim_));
  buf_.assign(initial.values().begin(), initial.values().end());
  if (const auto& c = model.constant_diffusion()) diff_ = *c;
}

SegmentView EulerPath::current() const {
  return SegmentView(shape_, std::span<const double>(buf_).last(shape_.size()));
}

void EulerPath::compact() {
  const std::size_t keep = shape_.size();
  std::copy(buf_.end() - static_cast<std::ptrdiff_t>(keep), buf_.end(), buf_.begin());
  buf_.resize(keep);
}

void EulerPath::advance(std::size_t steps) {
  const double dt = shape_.step;
  const bool constant_sigma = model_->constant_diffusion().has_value();
  if (keep_history_) buf_.reserve(buf_.size() + steps * dim_);
  for (std::size_t s = 0; s < steps; ++s) {
    if (!keep_history_ && buf_.size() + dim_ > shape_.size() + kSlackNodes * dim_) compact();
    const SegmentView x = current();
    model_->drift(x, drift_);
    if (!constant_sigma) model_->diffusion(x, diff_);
    const std::uint64_t q0 = static_cast<std::uint64_t>(steps_) * dim_;
    for (std::size_t j = 0; j < dim_; ++j) z_[j] = noise_.at(q0 + j);
    const std::size_t base = buf_.size() - dim_;
    bool finite = true;
    for (std::size_t i = 0; i < dim_; ++i) {
      double inc = drift_[i] * dt;
      double noise = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) noise += diff_[i * dim_ + j] * z_[j];
      inc += noise * sqrt_dt_;
      const double next = buf_[base + i] + inc;
      finite = finite && std::isfinite(next) && std::isfinite(drift_[i]);
      buf_.push_back(next);
    }
    if (!finite) throw NumericBlowup("non-finite drift/diffusion in model '" + model_->name() + "'", time());
    ++steps_;
  }
}

Trajectory simulate(const ModelSpec& model, const Segment& initial, double horizon, double step,
                    RngStream rng) {
  if (!(horizon > 0.0)) throw RangeError("simulate: horizon must be positive");
  if (std::fabs(initial.shape().step - step) > 1e-15 * step) {
    throw ShapeError("simulate: initial segment grid step differs from the integration step");
  }
  const std::size_t n = grid_steps(horizon, step, "horizon");
  EulerPath path(model, initial, rng, /*keep_history=*/true);
  path.advance(n);
  return Trajectory(model.name(), initial.shape(), horizon, std::move(path).release_history(), rng);
}

} // namespace segflow
