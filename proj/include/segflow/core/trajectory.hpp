#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "segflow/core/model.hpp"
#include "segflow/core/rng.hpp"
#include "segflow/core/segment.hpp"

namespace segflow {

// Number of steps of size `step` in `span`; throws RangeError when span is
// negative or not a whole multiple of step.
std::size_t grid_steps(double span, double step, const char* what = "time");

// X(t) on the uniform grid -r0, -r0 + dt, ..., T, row-major (time-major).
class Trajectory {
public:
  Trajectory(std::string model_name, SegmentShape shape, double horizon,
             std::vector<double> states, RngStream seed);

  const std::string& model_name() const { return model_name_; }
  const SegmentShape& shape() const { return shape_; }
  double step() const { return shape_.step; }
  double horizon() const { return horizon_; }
  const RngStream& seed() const { return seed_; }
  std::size_t grid_points() const { return states_.size() / shape_.dim; }
  std::span<const double> states() const { return states_; }

  // X(k dt - r0) coordinate j; k = 0 is the oldest node of the initial segment.
  double state(std::size_t k, std::size_t j = 0) const { return states_[k * shape_.dim + j]; }
  // Grid index of time t = k dt (t >= 0).
  std::size_t index_of_step(std::size_t k) const { return k + shape_.intervals; }

  // Zero-copy window for on-grid t = k * dt.
  SegmentView window(std::size_t k) const;

private:
  std::string model_name_;
  SegmentShape shape_;
  double horizon_;
  std::vector<double> states_;
  RngStream seed_;
};

// X_t as a Segment: exact copy on-grid, nodes linearly interpolated off-grid.
Segment segment_at(const Trajectory& traj, double t);

// Explicit Euler-Maruyama for the segment process. The history buffer always
// holds the current window contiguously, so drift/diffusion read a SegmentView
// without copies. Gaussian increment j of step n is stream normal n*d + j.
class EulerPath {
public:
  EulerPath(const ModelSpec& model, const Segment& initial, RngStream rng,
            bool keep_history = false);

  // Advances `steps` Euler steps; throws NumericBlowup on non-finite values.
  void advance(std::size_t steps);

  SegmentView current() const;
  double now(std::size_t j = 0) const { return buf_[buf_.size() - dim_ + j]; }
  std::size_t steps_taken() const { return steps_; }
  double time() const { return static_cast<double>(steps_) * shape_.step; }
  const SegmentShape& shape() const { return shape_; }

  // Full history (only meaningful with keep_history).
  std::vector<double> release_history() && { return std::move(buf_); }

private:
  void compact();

  const ModelSpec* model_;
  SegmentShape shape_;
  std::size_t dim_;
  NormalSource noise_;
  bool keep_history_;
  std::vector<double> buf_;
  std::vector<double> drift_;
  std::vector<double> diff_;
  std::vector<double> z_;
  std::size_t steps_ = 0;
  double sqrt_dt_;
};

// Simulates one trajectory on [0, horizon]; horizon must be a multiple of step.
Trajectory simulate(const ModelSpec& model, const Segment& initial, double horizon, double step,
                    RngStream rng);

} // namespace segflow
