#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "segflow/core/rng.hpp"
#include "segflow/limit/semigroup.hpp"

namespace segflow {

// sqrt(2 n log log n), defined for n >= 3.
double lil_scale(std::size_t n);

// Lambda_n(t) from f(X_1), ..., f(X_n) (f_values[l-1] = f(X_l)) and the
// prefix sums prefix[j] = f(X_1) + ... + f(X_j), prefix[0] = 0:
// (prefix[k-1] + (n t - k) f(X_k)) / (D sqrt(2 n log log n)), k = min(floor(n t), n),
// closed at t = 1.
double lil_lambda(std::span<const double> prefix, std::span<const double> f_values, std::size_t n,
                  double t, double d_hat);

struct LilReport {
  std::vector<std::size_t> n_grid;
  // S_n / sqrt(2 n log log n), S_n = sum_{l<=n} f(X_l).
  std::vector<double> normalized_sums;
  std::vector<double> running_max;
  std::vector<double> running_min;
  double d_hat = 0.0;
  // max_t |Lambda_n(t)| over the nodes t = k/n.
  std::vector<double> sup_norm_of_lambda;
  // Lambda_n(1) and sum_{l=1}^{n-1} f(X_l) / (D sqrt(2 n log log n)).
  std::vector<double> endpoint_lambda;
  std::vector<double> endpoint_direct;
  bool endpoint_identity = false;
};

// Geometric checkpoints from 16 to n_max (n_max always included).
std::vector<std::size_t> lil_checkpoints(std::size_t n_max, std::size_t count);

// One long unit-time path from xi (rng); f sampled at integer times.
LilReport lil_run(const SemigroupEvaluator& sg, const CenteredObservable& f,
                  const SegmentView& xi, std::size_t n_max, double d_hat,
                  std::span<const std::size_t> checkpoints, const RngStream& rng);

struct CameronMartin {
  double norm = 0.0;
  bool member = false;
};

// int_0^1 |h'|^2 for the piecewise-linear interpolant of nodes on a uniform
// grid of [0, 1]; nodes[0] must be 0.
CameronMartin cameron_martin_norm(std::span<const double> nodes, double tolerance = 1e-12);

} // namespace segflow
