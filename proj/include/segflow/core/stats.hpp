#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace segflow {

// A Monte Carlo estimate and its standard error.
struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

// Running mean/variance (Welford). Order-dependent in the last bits, so fold
// index-ordered buffers to stay reproducible.
class Welford {
public:
  void add(double x);
  std::size_t count() const { return n_; }
  double mean() const { return mean_; }
  // Unbiased sample variance; 0 for fewer than two samples.
  double variance() const;
  double std_error() const;
  Estimate estimate() const { return {mean_, std_error()}; }

private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

Estimate mean_estimate(std::span<const double> xs);
double sample_variance(std::span<const double> xs);

// Ordinary least squares y = a + b x.
struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double intercept_se = 0.0;
  double slope_se = 0.0;
  double r_squared = 0.0;
  std::size_t n = 0;
};

LineFit fit_line(std::span<const double> x, std::span<const double> y);

// Type-7 (linear interpolation) sample quantile, q in [0,1].
double quantile(std::vector<double> xs, double q);

double normal_cdf(double z);

// sup_z |F_n(z) - Phi(z / sd)| for the sample xs (sd > 0).
double ks_statistic_normal(std::vector<double> xs, double sd);

// Asymptotic standard deviation of the one-sample KS statistic under the null.
double ks_standard_error(std::size_t n);

// Batch means estimate of the mean of a stationary, correlated series.
Estimate batch_means(std::span<const double> xs, std::size_t batches);

} // namespace segflow
