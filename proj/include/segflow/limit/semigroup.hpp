#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "segflow/core/model.hpp"
#include "segflow/core/rng.hpp"
#include "segflow/core/stats.hpp"
#include "segflow/ergodic/ensemble.hpp"
#include "segflow/metric/metric.hpp"

namespace segflow {

// f - mu_f, with mu_f an estimate of the stationary mean of f.
struct CenteredObservable {
  Observable base;
  double mu_f = 0.0;
  double mu_f_se = 0.0;
  // Number of stationary samples (or paths) behind mu_f.
  std::size_t sample_size = 0;

  double operator()(const SegmentView& x) const { return base(x) - mu_f; }
  Observable as_observable() const;
  // Weighted Lipschitz norm bound of f - mu_f when f declares one.
  std::optional<double> norm_bound(const MetricParams& mp) const;
};

// Exact centering (mu_f given).
CenteredObservable centered(Observable f, double mu_f, double mu_f_se = 0.0,
                            std::size_t sample_size = 0);
// Centering by a long-run time average.
CenteredObservable center_by_time_average(const ModelSpec& model, Observable f,
                                          const Segment& initial, const TimeAverageConfig& cfg);

using PathVisitor = std::function<void(std::size_t, const SegmentView&)>;

// Transition semigroup P_t of a segment-valued Markov process, accessed
// through sample paths. Kernels with a known law may also report exact
// expectations, in which case estimators use them with zero error.
class SemigroupEvaluator {
public:
  virtual ~SemigroupEvaluator() = default;

  virtual const std::string& name() const = 0;
  virtual const SegmentShape& shape() const = 0;
  // Finest time resolution of the process; observation steps are multiples.
  virtual double time_step() const = 0;

  // One path from xi on `rng`, observed at k * obs_step for k = 0..n_obs.
  virtual void walk(const SegmentView& xi, double obs_step, std::size_t n_obs,
                    const RngStream& rng, const PathVisitor& visit) const = 0;

  // P_{k obs_step} f(xi), k = 0..n_obs, when available in closed form.
  virtual std::optional<std::vector<double>> exact_series(const Observable& f,
                                                          const SegmentView& xi, double obs_step,
                                                          std::size_t n_obs) const;

  // Mean of f(X_t) over R paths (replica r on rng.child(r)); exact if possible.
  Estimate estimate(const Observable& f, const SegmentView& xi, double t, std::size_t replicas,
                    const RngStream& rng) const;
};

// Default evaluator: Euler-Maruyama paths of the model.
class SdeEvaluator final : public SemigroupEvaluator {
public:
  SdeEvaluator(const ModelSpec& model, double step);

  const std::string& name() const override { return model_->name(); }
  const SegmentShape& shape() const override { return shape_; }
  double time_step() const override { return shape_.step; }
  const ModelSpec& model() const { return *model_; }

  void walk(const SegmentView& xi, double obs_step, std::size_t n_obs, const RngStream& rng,
            const PathVisitor& visit) const override;

private:
  const ModelSpec* model_;
  SegmentShape shape_;
};

// +/-1 telegraph process with flip rate kappa, held as constant segments:
// P_t g(x) = g(x) + (1 - e^{-2 kappa t})/2 (g(-x) - g(x)), so P_t f = e^{-2 kappa t} f
// for odd f. Paths flip on the grid with the matching per-step probability.
class TelegraphKernel final : public SemigroupEvaluator {
public:
  TelegraphKernel(SegmentShape shape, double kappa);

  const std::string& name() const override { return name_; }
  const SegmentShape& shape() const override { return shape_; }
  double time_step() const override { return shape_.step; }
  double kappa() const { return kappa_; }

  void walk(const SegmentView& xi, double obs_step, std::size_t n_obs, const RngStream& rng,
            const PathVisitor& visit) const override;
  std::optional<std::vector<double>> exact_series(const Observable& f, const SegmentView& xi,
                                                  double obs_step,
                                                  std::size_t n_obs) const override;

private:
  std::string name_ = "telegraph";
  SegmentShape shape_;
  double kappa_;
};

// Piecewise-constant process renewed at integer times with an independent
// N(0, v) level: X_k for k >= 1 is i.i.d., so P_k f = E f(N(0,v)) for k >= 1.
// Expectations use 64-point Gauss-Hermite quadrature.
class IidKernel final : public SemigroupEvaluator {
public:
  IidKernel(SegmentShape shape, double variance);

  const std::string& name() const override { return name_; }
  const SegmentShape& shape() const override { return shape_; }
  double time_step() const override { return shape_.step; }
  double variance() const { return variance_; }

  void walk(const SegmentView& xi, double obs_step, std::size_t n_obs, const RngStream& rng,
            const PathVisitor& visit) const override;
  std::optional<std::vector<double>> exact_series(const Observable& f, const SegmentView& xi,
                                                  double obs_step,
                                                  std::size_t n_obs) const override;

private:
  std::string name_ = "iid";
  SegmentShape shape_;
  double variance_;
};

// Synthetic kernels by name, for tests and the CLI.
using KernelFactory = std::function<std::unique_ptr<SemigroupEvaluator>(const SegmentShape&,
                                                                        const std::map<std::string, double>&)>;
void register_kernel(const std::string& name, KernelFactory factory);
std::unique_ptr<SemigroupEvaluator> make_kernel(const std::string& name, const SegmentShape& shape,
                                                const std::map<std::string, double>& params = {});
std::vector<std::string> kernel_names();

} // namespace segflow
