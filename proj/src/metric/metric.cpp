#include "segflow/metric/metric.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "segflow/core/errors.hpp"
#include "segflow/core/parallel.hpp"
#include "segflow/metric/assignment.hpp"

namespace segflow {

void MetricParams::validate() const {
  if (!(p >= 1.0) || !std::isfinite(p)) throw RangeError("metric.p must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw RangeError("metric.gamma must lie in (0, 1]");
}

double rho_with_norms(const SegmentView& x, const SegmentView& y, double norm_x, double norm_y,
                      const MetricParams& mp) {
  const double dist = sup_distance(x, y);
  if (dist == 0.0) return 0.0;
  const double near = std::min(1.0, mp.gamma == 1.0 ? dist : std::pow(dist, mp.gamma));
  const auto pw = [&](double r) { return mp.p == 2.0 ? r * r : std::pow(r, mp.p); };
  return near * std::sqrt(1.0 + (pw(norm_x) + pw(norm_y)));
}

double rho(const SegmentView& x, const SegmentView& y, const MetricParams& mp) {
  return rho_with_norms(x, y, sup_norm(x), sup_norm(y), mp);
}

Observable eval0_observable(std::size_t coord) {
  Observable f;
  f.name = coord == 0 ? "eval0" : "eval0[" + std::to_string(coord) + "]";
  f.eval = [coord](const SegmentView& x) { return x.now(coord); };
  f.declared_norm = [](const MetricParams& mp) -> std::optional<double> {
    if (mp.p < 2.0) return std::nullopt;
    return 1.0 + std::numbers::sqrt2;
  };
  return f;
}

Observable sup_norm_pow_observable(double q) {
  if (!(q > 0.0)) throw RangeError("sup_norm_pow: q must be positive");
  Observable f;
  f.name = "sup_norm_pow";
  f.eval = [q](const SegmentView& x) { return std::pow(sup_norm(x), q); };
  return f;
}

Observable sin_eval0_observable() {
  Observable f;
  f.name = "sin_eval0";
  f.eval = [](const SegmentView& x) { return std::sin(x.now()); };
  f.declared_norm = [](const MetricParams&) -> std::optional<double> { return 3.0; };
  return f;
}

Observable constant_observable(double c) {
  Observable f;
  f.name = "constant";
  f.eval = [c](const SegmentView&) { return c; };
  f.declared_norm = [c](const MetricParams&) -> std::optional<double> { return std::fabs(c); };
  return f;
}

Observable linear_combination(std::vector<double> weights, std::vector<Observable> parts) {
  if (weights.size() != parts.size() || parts.empty()) {
    throw ShapeError("linear_combination needs one weight per observable");
  }
  Observable f;
  f.name = "lincomb";
  f.eval = [weights, parts](const SegmentView& x) {
    double s = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) s += weights[i] * parts[i](x);
    return s;
  };
  f.declared_norm = [weights, parts](const MetricParams& mp) -> std::optional<double> {
    double s = 0.0;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      const auto b = parts[i].norm_bound(mp);
      if (!b) return std::nullopt;
      s += std::fabs(weights[i]) * *b;
    }
    return s;
  };
  return f;
}

double lip_norm_lower_bound(const Observable& f, const SegmentSampler& sampler, std::size_t n,
                            const MetricParams& mp) {
  mp.validate();
  if (n < 2) throw RangeError("lip_norm_lower_bound needs n >= 2");
  std::vector<Segment> xs;
  xs.reserve(n);
  std::vector<double> fx(n), norms(n);
  double level = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    xs.push_back(sampler(i));
    fx[i] = f(xs.back());
    norms[i] = sup_norm(xs.back());
    level = std::max(level, std::fabs(fx[i]) / (1.0 + std::pow(norms[i], mp.p / 2.0)));
  }
  double osc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double df = std::fabs(fx[i] - fx[j]);
      const double r = rho_with_norms(xs[i], xs[j], norms[i], norms[j], mp);
      if (r == 0.0) {
        if (!(xs[i] == xs[j])) throw NumericError("rho vanished on a pair of distinct segments");
        continue;
      }
      osc = std::max(osc, df / r);
    }
  }
  return level + osc;
}

EmpiricalMeasure::EmpiricalMeasure(std::vector<Segment> atoms) : atoms_(std::move(atoms)) {
  if (atoms_.empty()) throw ShapeError("empirical measure needs at least one atom");
  for (const auto& a : atoms_) {
    if (!(a.shape() == atoms_.front().shape())) {
      throw ShapeError("empirical measure atoms have mixed grids");
    }
  }
}

EmpiricalMeasure EmpiricalMeasure::slice(std::size_t first, std::size_t count) const {
  if (first + count > atoms_.size() || count == 0) throw RangeError("empirical measure slice out of range");
  return EmpiricalMeasure(std::vector<Segment>(atoms_.begin() + static_cast<std::ptrdiff_t>(first),
                                               atoms_.begin() + static_cast<std::ptrdiff_t>(first + count)));
}

double wasserstein(const EmpiricalMeasure& a, const EmpiricalMeasure& b, const MetricParams& mp,
                   const WassersteinOptions& opts) {
  mp.validate();
  if (!(a.shape() == b.shape())) throw ShapeError("wasserstein: measures live on different grids");
  const std::size_t n = a.size();
  if (b.size() != n) {
    throw ShapeError("wasserstein: atom counts differ (" + std::to_string(n) + " vs " +
                     std::to_string(b.size()) + "); resample to equal size");
  }
  if (n > opts.cap) {
    throw CapacityError("wasserstein: " + std::to_string(n) + " atoms exceed the exact solver cap " +
                        std::to_string(opts.cap) + "; resample to at most the cap");
  }
  std::vector<double> na(n), nb(n);
  for (std::size_t i = 0; i < n; ++i) {
    na[i] = sup_norm(a[i]);
    nb[i] = sup_norm(b[i]);
  }
  std::vector<double> cost(n * n);
  parallel::parallel_for(n, [&](std::size_t i) {
    for (std::size_t j = 0; j < n; ++j) cost[i * n + j] = rho_with_norms(a[i], b[j], na[i], nb[j], mp);
  });
  const auto col = solve_assignment(cost, n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) total += cost[i * n + col[i]];
  return total / static_cast<double>(n);
}

} // namespace segflow
