#include "segflow/limit/lil.hpp"

#include <algorithm>
#include <cmath>

#include "segflow/core/errors.hpp"

namespace segflow {

double lil_scale(std::size_t n) {
  if (n < 3) throw RangeError("log log n normalisation needs n >= 3");
  const double x = static_cast<double>(n);
  return std::sqrt(2.0 * x * std::log(std::log(x)));
}

double lil_lambda(std::span<const double> prefix, std::span<const double> f_values, std::size_t n,
                  double t, double d_hat) {
  if (!(t >= 0.0 && t <= 1.0)) throw RangeError("Lambda_n is defined on [0, 1]");
  if (n > f_values.size() || prefix.size() < n) throw RangeError("Lambda_n: not enough samples");
  const double nt = static_cast<double>(n) * t;
  const auto k = std::min(static_cast<std::size_t>(std::floor(nt)), n);
  // Both ends of the first cell are 0, so the path is flat there.
  if (k == 0) return 0.0;
  const double inner = prefix[k - 1] + (nt - static_cast<double>(k)) * f_values[k - 1];
  return inner / (d_hat * lil_scale(n));
}

std::vector<std::size_t> lil_checkpoints(std::size_t n_max, std::size_t count) {
  if (n_max < 16) throw RangeError("LIL runs need n_max >= 16");
  if (count < 2) count = 2;
  std::vector<std::size_t> out;
  const double lo = std::log(16.0), hi = std::log(static_cast<double>(n_max));
  for (std::size_t i = 0; i < count; ++i) {
    const double v = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    const auto n = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(v)), 16, n_max);
    if (out.empty() || n > out.back()) out.push_back(n);
  }
  if (out.back() != n_max) out.push_back(n_max);
  return out;
}

LilReport lil_run(const SemigroupEvaluator& sg, const CenteredObservable& f,
                  const SegmentView& xi, std::size_t n_max, double d_hat,
                  std::span<const std::size_t> checkpoints, const RngStream& rng) {
  if (!(d_hat > 0.0)) throw DomainError("lil_run: D-hat must be positive");
  if (n_max < 16) throw RangeError("lil_run: n_max must be >= 16");
  for (std::size_t i = 0; i < checkpoints.size(); ++i) {
    if (checkpoints[i] < 16 || checkpoints[i] > n_max || (i > 0 && checkpoints[i] <= checkpoints[i - 1])) {
      throw RangeError("lil_run: checkpoints must increase within [16, n_max]");
    }
  }
  const Observable fc = f.as_observable();
  std::vector<double> fv(n_max);
  sg.walk(xi, 1.0, n_max, rng, [&](std::size_t k, const SegmentView& x) {
    if (k > 0) fv[k - 1] = fc(x);
  });
  std::vector<double> prefix(n_max + 1, 0.0);
  for (std::size_t l = 1; l <= n_max; ++l) prefix[l] = prefix[l - 1] + fv[l - 1];

  LilReport rep;
  rep.d_hat = d_hat;
  rep.endpoint_identity = true;
  double run_max = -INFINITY, run_min = INFINITY;
  for (std::size_t n : checkpoints) {
    const double scale = lil_scale(n);
    const double s = prefix[n] / scale;
    run_max = std::max(run_max, s);
    run_min = std::min(run_min, s);
    rep.n_grid.push_back(n);
    rep.normalized_sums.push_back(s);
    rep.running_max.push_back(run_max);
    rep.running_min.push_back(run_min);
    // Lambda_n is affine between the nodes k/n, where it equals prefix[k-1].
    double sup = 0.0;
    for (std::size_t j = 0; j < n; ++j) sup = std::max(sup, std::fabs(prefix[j]));
    rep.sup_norm_of_lambda.push_back(sup / (d_hat * scale));
    const double at_one = lil_lambda(prefix, fv, n, 1.0, d_hat);
    double direct = 0.0;
    for (std::size_t l = 1; l < n; ++l) direct += fv[l - 1];
    direct /= d_hat * scale;
    rep.endpoint_lambda.push_back(at_one);
    rep.endpoint_direct.push_back(direct);
    if (at_one != direct) rep.endpoint_identity = false;
  }
  return rep;
}

CameronMartin cameron_martin_norm(std::span<const double> nodes, double tolerance) {
  if (nodes.size() < 2) throw RangeError("Cameron-Martin norm needs at least two nodes");
  if (nodes[0] != 0.0) throw DomainError("Cameron-Martin paths start at h(0) = 0");
  const double m = static_cast<double>(nodes.size() - 1);
  double s = 0.0;
  for (std::size_t i = 1; i < nodes.size(); ++i) {
    const double d = nodes[i] - nodes[i - 1];
    s += d * d;
  }
  CameronMartin out;
  out.norm = s * m;
  out.member = out.norm <= 1.0 + tolerance;
  return out;
}

} // namespace segflow
