#pragma once

#include <cmath>
#include <vector>

#include "segflow/core/model.hpp"
#include "segflow/ergodic/ensemble.hpp"
#include "segflow/harness/registry.hpp"

namespace segflow::fixtures {

// d = 1 model with b(xi) = -a xi(0) + c xi(-r0) and constant sigma s (s may be 0).
inline ModelSpec scalar_model(double a, double c, double s, double delay, double l1 = 1.0,
                              double l2 = 0.0) {
  ModelSpec::Params p;
  p.name = "scalar";
  p.dim = 1;
  p.delay = delay;
  p.drift = [a, c](const SegmentView& x, std::span<double> out) {
    out[0] = -a * x.node(x.shape().intervals) + c * x.node(0);
  };
  p.diffusion = [s](const SegmentView&, std::span<double> out) { out[0] = s; };
  p.constant_diffusion = std::vector<double>{s};
  p.lambda1 = l1;
  p.lambda2 = l2;
  return ModelSpec(std::move(p));
}

inline ModelSpec reference_model() { return linear_delay_ou(2.0, 0.1, 1.0, 0.5, 1); }

// Fixed decay law used to truncate corrector series on synthetic kernels.
inline RateFit rate_of(double c, double beta) {
  RateFit r;
  r.c_hat = c;
  r.beta_hat = beta;
  r.times = {0.0, 1.0};
  r.values = {c, c * std::exp(-beta)};
  r.r_squared = 1.0;
  return r;
}

// Method of steps for m'(t) = -a m(t) + c m(t - r0), m = 1 on [-r0, 0], by
// classical RK4 on a fine grid (the delayed term is a known function on each step).
inline std::vector<double> delay_ode_reference(double a, double c, double delay, double horizon,
                                               std::size_t per_delay) {
  const double h = delay / static_cast<double>(per_delay);
  const auto steps = static_cast<std::size_t>(std::lround(horizon / h));
  // m on the grid -r0, -r0 + h/2, ..., so the RK4 midpoints of the lag are grid values.
  std::vector<double> m(2 * (per_delay + steps) + 1, 1.0);
  const std::size_t lag = 2 * per_delay;
  for (std::size_t n = 0; n < steps; ++n) {
    const std::size_t i = 2 * (per_delay + n);
    const double y = m[i];
    const double d0 = m[i - lag], d1 = m[i + 1 - lag], d2 = m[i + 2 - lag];
    const double k1 = -a * y + c * d0;
    const double k2 = -a * (y + 0.5 * h * k1) + c * d1;
    const double k3 = -a * (y + 0.5 * h * k2) + c * d1;
    const double k4 = -a * (y + h * k3) + c * d2;
    const double next = y + h * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
    // Midpoint by cubic Hermite interpolation.
    const double f0 = k1, f1 = -a * next + c * d2;
    m[i + 1] = 0.5 * (y + next) + h * (f0 - f1) / 8.0;
    m[i + 2] = next;
  }
  std::vector<double> out;
  for (std::size_t n = 0; n <= steps; ++n) out.push_back(m[2 * (per_delay + n)]);
  return out;
}

} // namespace segflow::fixtures
