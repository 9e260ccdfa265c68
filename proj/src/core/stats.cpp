#include "segflow/core/stats.hpp"

#include <algorithm>
#include <cmath>

#include "segflow/core/errors.hpp"

namespace segflow {

void Welford::add(double x) {
  ++n_;
  const double delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  m2_ += delta * (x - mean_);
}

double Welford::variance() const {
  return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
}

double Welford::std_error() const {
  return n_ < 2 ? 0.0 : std::sqrt(variance() / static_cast<double>(n_));
}

Estimate mean_estimate(std::span<const double> xs) {
  Welford w;
  for (double x : xs) w.add(x);
  return w.estimate();
}

double sample_variance(std::span<const double> xs) {
  Welford w;
  for (double x : xs) w.add(x);
  return w.variance();
}

LineFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw ShapeError("fit_line: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 2) throw RangeError("fit_line needs at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) throw RangeError("fit_line: x values are all equal");
  LineFit f;
  f.n = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double sse = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    sse += r * r;
  }
  f.r_squared = syy > 0.0 ? std::max(0.0, 1.0 - sse / syy) : 1.0;
  if (n > 2) {
    const double s2 = sse / static_cast<double>(n - 2);
    f.slope_se = std::sqrt(s2 / sxx);
    f.intercept_se = std::sqrt(s2 * (1.0 / static_cast<double>(n) + mx * mx / sxx));
  }
  return f;
}

double quantile(std::vector<double> xs, double q) {
  if (xs.empty()) throw RangeError("quantile of an empty sample");
  if (!(q >= 0.0 && q <= 1.0)) throw RangeError("quantile level outside [0,1]");
  std::sort(xs.begin(), xs.end());
  const double h = q * static_cast<double>(xs.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, xs.size() - 1);
  return xs[lo] + (h - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double ks_statistic_normal(std::vector<double> xs, double sd) {
  if (xs.empty()) throw RangeError("KS statistic of an empty sample");
  if (!(sd > 0.0)) throw DomainError("KS reference standard deviation must be positive");
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double F = normal_cdf(xs[i] / sd);
    d = std::max(d, static_cast<double>(i + 1) / n - F);
    d = std::max(d, F - static_cast<double>(i) / n);
  }
  return d;
}

double ks_standard_error(std::size_t n) {
  // sd of the Kolmogorov distribution: sqrt(pi^2/12 - pi ln^2 2 / 2) ~ 0.2603.
  return 0.2603 / std::sqrt(static_cast<double>(n));
}

Estimate batch_means(std::span<const double> xs, std::size_t batches) {
  if (batches < 2) throw RangeError("batch_means needs at least two batches");
  const std::size_t len = xs.size() / batches;
  if (len == 0) throw RangeError("batch_means: fewer samples than batches");
  std::vector<double> means(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    double s = 0.0;
    for (std::size_t i = 0; i < len; ++i) s += xs[b * len + i];
    means[b] = s / static_cast<double>(len);
  }
  return mean_estimate(means);
}

} // namespace segflow
