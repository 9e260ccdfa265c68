#include "segflow/limit/clt.hpp"

#include <algorithm>
#include <cmath>

#include "segflow/core/errors.hpp"
#include "segflow/core/parallel.hpp"
#include "segflow/core/stats.hpp"
#include "segflow/limit/slln.hpp"

namespace segflow {

double weighted_ks_degenerate(std::vector<double> xs) {
  if (xs.empty()) throw RangeError("weighted statistic of an empty sample");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  // F_n(z) = #{x <= z}/n, F_n(z-) = #{x < z}/n.
  const auto cdf = [&](double z) {
    return static_cast<double>(std::upper_bound(xs.begin(), xs.end(), z) - xs.begin()) / n;
  };
  const auto cdf_left = [&](double z) {
    return static_cast<double>(std::lower_bound(xs.begin(), xs.end(), z) - xs.begin()) / n;
  };
  double d = cdf(-1.0);
  d = std::max(d, 1.0 - cdf_left(1.0));
  for (double x : xs) {
    if (x > -1.0 && x < 0.0) d = std::max(d, -x * cdf(x));
    if (x > 0.0 && x <= 1.0) d = std::max(d, x * (1.0 - cdf_left(x)));
  }
  return d;
}

CltReport clt_test(const SemigroupEvaluator& sg, const CenteredObservable& f,
                   const SegmentView& xi, std::span<const double> times, std::size_t replicas,
                   double d_f, const RngStream& rng) {
  if (!(d_f >= 0.0)) throw DomainError("clt_test: D_f must be non-negative");
  if (replicas < 2) throw RangeError("clt_test needs at least two replicas");
  if (times.empty()) throw RangeError("clt_test: empty time grid");
  const Observable fc = f.as_observable();
  const std::size_t nt = times.size();
  std::vector<double> z(nt * replicas);
  parallel::parallel_for(replicas, [&](std::size_t r) {
    const auto a = additive_series(sg, fc, xi, times, rng.child(r));
    for (std::size_t i = 0; i < nt; ++i) z[i * replicas + r] = std::sqrt(times[i]) * a[i];
  });

  CltReport rep;
  rep.times.assign(times.begin(), times.end());
  rep.d_f = d_f;
  rep.degenerate = d_f == 0.0;
  rep.replicas = replicas;
  rep.statistic_se = ks_standard_error(replicas);
  for (std::size_t i = 0; i < nt; ++i) {
    std::vector<double> col(z.begin() + static_cast<std::ptrdiff_t>(i * replicas),
                            z.begin() + static_cast<std::ptrdiff_t>((i + 1) * replicas));
    rep.statistics.push_back(rep.degenerate ? weighted_ks_degenerate(std::move(col))
                                            : ks_statistic_normal(std::move(col), d_f));
  }
  rep.non_increasing = true;
  for (std::size_t i = 1; i < nt; ++i) {
    if (rep.statistics[i] > rep.statistics[i - 1] + 2.0 * rep.statistic_se) rep.non_increasing = false;
  }
  rep.last_samples.assign(z.end() - static_cast<std::ptrdiff_t>(replicas), z.end());
  return rep;
}

} // namespace segflow
