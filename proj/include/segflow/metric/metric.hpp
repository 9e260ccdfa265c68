#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "segflow/core/assumptions.hpp"
#include "segflow/core/segment.hpp"

namespace segflow {

struct MetricParams {
  double p = 2.0;
  double gamma = 1.0;

  // Throws RangeError unless p >= 1 and 0 < gamma <= 1.
  void validate() const;
};

// (1 ^ ||x-y||^gamma) * sqrt(1 + ||x||^p + ||y||^p), grid sup norms.
double rho(const SegmentView& x, const SegmentView& y, const MetricParams& mp);
// Same, with the sup norms of x and y supplied by the caller.
double rho_with_norms(const SegmentView& x, const SegmentView& y, double norm_x, double norm_y,
                      const MetricParams& mp);

// A real-valued functional of the segment with an optional a-priori bound on
// its weighted Lipschitz norm (which depends on the metric parameters).
struct Observable {
  std::string name;
  std::function<double(const SegmentView&)> eval;
  std::function<std::optional<double>(const MetricParams&)> declared_norm;

  double operator()(const SegmentView& x) const { return eval(x); }
  std::optional<double> norm_bound(const MetricParams& mp) const {
    return declared_norm ? declared_norm(mp) : std::nullopt;
  }
};

Observable eval0_observable(std::size_t coord = 0);
Observable sup_norm_pow_observable(double q);
Observable sin_eval0_observable();
Observable constant_observable(double c);
// sum_i w_i f_i
Observable linear_combination(std::vector<double> weights, std::vector<Observable> parts);

// sup |f|/(1+||xi||^{p/2}) over samples plus sup |f(xi)-f(eta)|/rho(xi,eta)
// over all sample pairs: a lower bound on the weighted Lipschitz norm that
// can only grow with n.
double lip_norm_lower_bound(const Observable& f, const SegmentSampler& sampler, std::size_t n,
                            const MetricParams& mp);

// Equal-weight empirical law of segments on a common grid.
class EmpiricalMeasure {
public:
  explicit EmpiricalMeasure(std::vector<Segment> atoms);

  std::size_t size() const { return atoms_.size(); }
  const Segment& operator[](std::size_t i) const { return atoms_[i]; }
  const std::vector<Segment>& atoms() const { return atoms_; }
  const SegmentShape& shape() const { return atoms_.front().shape(); }

  // Sub-sample of atoms [first, first + count).
  EmpiricalMeasure slice(std::size_t first, std::size_t count) const;

private:
  std::vector<Segment> atoms_;
};

struct WassersteinOptions {
  // Largest n handed to the exact O(n^3) assignment solver.
  std::size_t cap = 512;
};

// (1/n) min over permutations pi of sum_i rho(a_i, b_pi(i)).
double wasserstein(const EmpiricalMeasure& a, const EmpiricalMeasure& b, const MetricParams& mp,
                   const WassersteinOptions& opts = {});

} // namespace segflow
