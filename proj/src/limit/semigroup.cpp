#include "segflow/limit/semigroup.hpp"

#include <cmath>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "segflow/core/errors.hpp"
#include "segflow/core/trajectory.hpp"

namespace segflow {

Observable CenteredObservable::as_observable() const {
  Observable f;
  f.name = base.name + "_centered";
  f.eval = [b = base, mu = mu_f](const SegmentView& x) { return b(x) - mu; };
  f.declared_norm = [b = base, mu = mu_f](const MetricParams& mp) -> std::optional<double> {
    const auto nb = b.norm_bound(mp);
    if (!nb) return std::nullopt;
    return *nb + std::fabs(mu);
  };
  return f;
}

std::optional<double> CenteredObservable::norm_bound(const MetricParams& mp) const {
  const auto nb = base.norm_bound(mp);
  if (!nb) return std::nullopt;
  return *nb + std::fabs(mu_f);
}

CenteredObservable centered(Observable f, double mu_f, double mu_f_se, std::size_t sample_size) {
  CenteredObservable c;
  c.base = std::move(f);
  c.mu_f = mu_f;
  c.mu_f_se = mu_f_se;
  c.sample_size = sample_size;
  return c;
}

CenteredObservable center_by_time_average(const ModelSpec& model, Observable f,
                                          const Segment& initial, const TimeAverageConfig& cfg) {
  const Estimate mu = stationary_average(model, f, initial, cfg);
  return centered(std::move(f), mu.value, mu.se, cfg.n_traj);
}

std::optional<std::vector<double>> SemigroupEvaluator::exact_series(const Observable&,
                                                                    const SegmentView&, double,
                                                                    std::size_t) const {
  return std::nullopt;
}

Estimate SemigroupEvaluator::estimate(const Observable& f, const SegmentView& xi, double t,
                                      std::size_t replicas, const RngStream& rng) const {
  if (!(t >= 0.0)) throw RangeError("semigroup time must be non-negative");
  const std::size_t n = grid_steps(t, time_step(), "semigroup time");
  const double obs = n == 0 ? time_step() : t;
  const std::size_t n_obs = n == 0 ? 0 : 1;
  if (auto ex = exact_series(f, xi, obs, n_obs)) return {ex->back(), 0.0};
  if (replicas == 0) throw RangeError("semigroup estimate needs at least one replica");
  std::vector<double> vals(replicas);
  for (std::size_t r = 0; r < replicas; ++r) {
    walk(xi, obs, n_obs, rng.child(r), [&](std::size_t k, const SegmentView& x) {
      if (k == n_obs) vals[r] = f(x);
    });
  }
  return mean_estimate(vals);
}

SdeEvaluator::SdeEvaluator(const ModelSpec& model, double step)
    : model_(&model), shape_(model.shape(step)) {}

void SdeEvaluator::walk(const SegmentView& xi, double obs_step, std::size_t n_obs,
                        const RngStream& rng, const PathVisitor& visit) const {
  const std::size_t stride = grid_steps(obs_step, shape_.step, "observation step");
  if (stride == 0) throw RangeError("observation step must be positive");
  EulerPath path(*model_, Segment::from_view(xi), rng);
  visit(0, path.current());
  for (std::size_t k = 1; k <= n_obs; ++k) {
    path.advance(stride);
    visit(k, path.current());
  }
}

TelegraphKernel::TelegraphKernel(SegmentShape shape, double kappa) : shape_(shape), kappa_(kappa) {
  if (shape_.dim != 1) throw ShapeError("telegraph kernel is one-dimensional");
  if (!(kappa > 0.0)) throw DomainError("telegraph rate must be positive");
}

void TelegraphKernel::walk(const SegmentView& xi, double obs_step, std::size_t n_obs,
                           const RngStream& rng, const PathVisitor& visit) const {
  const std::size_t stride = grid_steps(obs_step, shape_.step, "observation step");
  const double flip = 0.5 * (1.0 - std::exp(-2.0 * kappa_ * shape_.step));
  double x = xi.now() >= 0.0 ? 1.0 : -1.0;
  Segment cur = Segment::constant(shape_, x);
  visit(0, cur);
  std::uint64_t draw = 0;
  for (std::size_t k = 1; k <= n_obs; ++k) {
    for (std::size_t s = 0; s < stride; ++s) {
      if (rng.uniform(draw++) < flip) x = -x;
    }
    cur = Segment::constant(shape_, x);
    visit(k, cur);
  }
}

std::optional<std::vector<double>> TelegraphKernel::exact_series(const Observable& f,
                                                                 const SegmentView& xi,
                                                                 double obs_step,
                                                                 std::size_t n_obs) const {
  const double x = xi.now() >= 0.0 ? 1.0 : -1.0;
  const double f_same = f(Segment::constant(shape_, x));
  const double f_flip = f(Segment::constant(shape_, -x));
  std::vector<double> out(n_obs + 1);
  for (std::size_t k = 0; k <= n_obs; ++k) {
    const double t = static_cast<double>(k) * obs_step;
    const double q = k == 0 ? 0.0 : 0.5 * (1.0 - std::exp(-2.0 * kappa_ * t));
    out[k] = k == 0 ? f_same : (1.0 - q) * f_same + q * f_flip;
  }
  return out;
}

namespace {

// Probabilists' Gauss-Hermite rule via Golub-Welsch: E g(Z) = sum w_i g(x_i).
struct HermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

const HermiteRule& hermite64() {
  static const HermiteRule rule = [] {
    constexpr int n = 64;
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int i = 1; i < n; ++i) {
      J(i, i - 1) = J(i - 1, i) = std::sqrt(static_cast<double>(i));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    HermiteRule r;
    for (int i = 0; i < n; ++i) {
      r.nodes.push_back(es.eigenvalues()(i));
      const double v0 = es.eigenvectors()(0, i);
      r.weights.push_back(v0 * v0);
    }
    return r;
  }();
  return rule;
}

} // namespace

IidKernel::IidKernel(SegmentShape shape, double variance) : shape_(shape), variance_(variance) {
  if (shape_.dim != 1) throw ShapeError("iid kernel is one-dimensional");
  if (!(variance > 0.0)) throw DomainError("iid kernel variance must be positive");
  grid_steps(1.0, shape_.step, "unit renewal time");
}

void IidKernel::walk(const SegmentView& xi, double obs_step, std::size_t n_obs,
                     const RngStream& rng, const PathVisitor& visit) const {
  const std::size_t stride = grid_steps(obs_step, shape_.step, "observation step");
  const std::size_t per_unit = grid_steps(1.0, shape_.step);
  const double sd = std::sqrt(variance_);
  visit(0, xi);
  for (std::size_t k = 1; k <= n_obs; ++k) {
    const std::size_t unit = k * stride / per_unit;
    if (unit == 0) {
      visit(k, xi);
    } else {
      visit(k, Segment::constant(shape_, sd * rng.normal(unit, 0, 1)));
    }
  }
}

std::optional<std::vector<double>> IidKernel::exact_series(const Observable& f,
                                                           const SegmentView& xi, double obs_step,
                                                           std::size_t n_obs) const {
  const std::size_t stride = grid_steps(obs_step, shape_.step, "observation step");
  const std::size_t per_unit = grid_steps(1.0, shape_.step);
  const auto& gh = hermite64();
  const double sd = std::sqrt(variance_);
  // Symmetric pairs first so odd f integrates to an exact zero.
  double renewed = 0.0;
  const std::size_t m = gh.nodes.size();
  for (std::size_t i = 0; i < m / 2; ++i) {
    const double lo = f(Segment::constant(shape_, sd * gh.nodes[i]));
    const double hi = f(Segment::constant(shape_, sd * gh.nodes[m - 1 - i]));
    renewed += gh.weights[i] * (lo + hi);
  }
  const double now = f(xi);
  std::vector<double> out(n_obs + 1);
  for (std::size_t k = 0; k <= n_obs; ++k) out[k] = k * stride < per_unit ? now : renewed;
  return out;
}

namespace {

std::map<std::string, KernelFactory>& kernel_table() {
  static std::map<std::string, KernelFactory> table = [] {
    std::map<std::string, KernelFactory> t;
    const auto get = [](const std::map<std::string, double>& p, const char* key, double def) {
      const auto it = p.find(key);
      return it == p.end() ? def : it->second;
    };
    t["telegraph"] = [get](const SegmentShape& s, const std::map<std::string, double>& p) {
      return std::make_unique<TelegraphKernel>(s, get(p, "kappa", 0.5));
    };
    t["iid"] = [get](const SegmentShape& s, const std::map<std::string, double>& p) {
      return std::make_unique<IidKernel>(s, get(p, "variance", 1.0));
    };
    return t;
  }();
  return table;
}

std::mutex g_kernel_mutex;

} // namespace

void register_kernel(const std::string& name, KernelFactory factory) {
  std::lock_guard lock(g_kernel_mutex);
  kernel_table()[name] = std::move(factory);
}

std::unique_ptr<SemigroupEvaluator> make_kernel(const std::string& name, const SegmentShape& shape,
                                                const std::map<std::string, double>& params) {
  std::lock_guard lock(g_kernel_mutex);
  const auto it = kernel_table().find(name);
  if (it == kernel_table().end()) throw ConfigError("unknown kernel '" + name + "'");
  return it->second(shape, params);
}

std::vector<std::string> kernel_names() {
  std::lock_guard lock(g_kernel_mutex);
  std::vector<std::string> names;
  for (const auto& [k, v] : kernel_table()) names.push_back(k);
  return names;
}

} // namespace segflow
