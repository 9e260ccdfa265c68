#include "segflow/harness/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>

#include "segflow/core/assumptions.hpp"
#include "segflow/ergodic/ensemble.hpp"
#include "segflow/ergodic/moments.hpp"
#include "segflow/harness/registry.hpp"
#include "segflow/limit/clt.hpp"
#include "segflow/limit/corrector.hpp"
#include "segflow/limit/lil.hpp"
#include "segflow/limit/martingale.hpp"
#include "segflow/limit/semigroup.hpp"
#include "segflow/limit/slln.hpp"

namespace segflow {

namespace {

using nlohmann::json;

// Streams of the limit-theorem stages, disjoint from the ensemble stage tags.
namespace tag {
constexpr std::uint64_t dissipativity = 20;
constexpr std::uint64_t ellipticity = 21;
constexpr std::uint64_t slln_decay = 30;
constexpr std::uint64_t slln_path = 31;
constexpr std::uint64_t variance = 40;
constexpr std::uint64_t vph = 41;
constexpr std::uint64_t clt = 42;
constexpr std::uint64_t variance_hat = 50;
constexpr std::uint64_t lil = 51;
constexpr std::uint64_t qv = 52;
constexpr std::uint64_t qv_lln = 53;
} // namespace tag

json to_json(const Estimate& e) { return {{"value", e.value}, {"se", e.se}}; }

json to_json(const RateFit& f) {
  return {{"c_hat", f.c_hat}, {"beta_hat", f.beta_hat}, {"beta_se", f.beta_se}, {"r_squared", f.r_squared}};
}

double joint_z(const Estimate& a, const Estimate& b) {
  const double se = std::hypot(a.se, b.se);
  const double diff = a.value - b.value;
  if (se > 0.0) return diff / se;
  return diff == 0.0 ? 0.0 : std::copysign(INFINITY, diff);
}

// Everything a pipeline needs, with the shared expensive pieces computed once.
class Context {
public:
  explicit Context(const ExperimentConfig& cfg)
      : cfg_(cfg), n_(cfg.numerics), model_(make_model(cfg.model, cfg.model_params)),
        shape_(model_.shape(n_.step)), obs_(make_observable(cfg.observable, cfg.observable_params)),
        xi0_(Segment::constant(shape_, n_.initial)), sg_(model_, n_.step) {}

  const ExperimentConfig& cfg() const { return cfg_; }
  const NumericConfig& n() const { return n_; }
  const ModelSpec& model() const { return model_; }
  const SegmentShape& shape() const { return shape_; }
  const Observable& observable() const { return obs_; }
  const Segment& xi0() const { return xi0_; }
  const SdeEvaluator& sg() const { return sg_; }

  RngStream stream(std::uint64_t t) const { return stage_stream(cfg_.master_seed, t); }

  EnsembleConfig ensemble(std::size_t n_traj) const {
    EnsembleConfig ec;
    ec.n_traj = n_traj;
    ec.burn_in = n_.burn_in;
    ec.thinning = n_.thinning;
    ec.step = n_.step;
    ec.master_seed = cfg_.master_seed;
    return ec;
  }

  EmpiricalMeasure stationary(std::size_t n_traj) const {
    return sample_invariant(model_, ensemble(n_traj), xi0_);
  }

  const CenteredObservable& f() {
    if (!f_) {
      TimeAverageConfig tc;
      tc.n_traj = n_.centering_paths;
      tc.burn_in = n_.centering_burn_in;
      tc.horizon = n_.centering_horizon;
      tc.step = n_.step;
      tc.master_seed = cfg_.master_seed;
      f_ = center_by_time_average(model_, obs_, xi0_, tc);
    }
    return *f_;
  }

  // Coupled curve on rate_traj trajectories; sets corrector truncation.
  const RateFit& rate() {
    if (!rate_) {
      const auto curve = ergodicity_curve(
          model_, Segment::constant(shape_, n_.ergodicity_initial), stationary(n_.rate_traj),
          n_.ergodicity_times, cfg_.metric, ensemble(n_.rate_traj), curve_options(CurveMode::coupled));
      if (curve.flat || !curve.fit.valid()) {
        throw EstimatorInconsistency("rate fit for corrector truncation shows no decay");
      }
      rate_ = curve.fit;
    }
    return *rate_;
  }

  CorrectorConfig corrector() {
    CorrectorConfig cc;
    cc.t_max = n_.corrector_t_max;
    cc.k_max = n_.corrector_k_max;
    cc.tail_tolerance = n_.tail_tolerance;
    cc.quad_step = n_.quad_step;
    cc.inner_replicas = n_.inner_replicas;
    cc.outer_replicas = n_.outer_replicas;
    cc.metric = cfg_.metric;
    cc.rate = rate();
    return cc;
  }

  CurveOptions curve_options(CurveMode mode) const {
    CurveOptions o;
    o.mode = mode;
    o.transport.cap = n_.transport_cap;
    return o;
  }

  const EmpiricalMeasure& atoms() {
    if (!atoms_) atoms_ = stationary(n_.stationary_atoms);
    return *atoms_;
  }

private:
  const ExperimentConfig& cfg_;
  const NumericConfig& n_;
  ModelSpec model_;
  SegmentShape shape_;
  Observable obs_;
  Segment xi0_;
  SdeEvaluator sg_;
  std::optional<CenteredObservable> f_;
  std::optional<RateFit> rate_;
  std::optional<EmpiricalMeasure> atoms_;
};

class Pipeline {
public:
  explicit Pipeline(const ExperimentConfig& cfg) : ctx_(cfg) {}

  void assumptions() {
    stage("assumptions", [&] {
      const auto& n = ctx_.n();
      const auto d = check_dissipativity(
          ctx_.model(), random_pairs(ctx_.shape(), ctx_.stream(tag::dissipativity), n.assumption_scale),
          n.assumption_samples);
      const auto e = check_ellipticity(
          ctx_.model(), random_segments(ctx_.shape(), ctx_.stream(tag::ellipticity), n.assumption_scale),
          n.assumption_samples);
      json& s = payload_["assumptions"];
      s["dissipativity"] = {{"lambda1", ctx_.model().lambda1()}, {"lambda2", ctx_.model().lambda2()},
                            {"n_pairs", d.n_pairs},             {"max_g", d.max_g},
                            {"worst_pair", d.worst_pair},       {"side_margin", d.side_margin},
                            {"pass", d.pass}};
      s["ellipticity"] = {{"sigma_bound", ctx_.model().sigma_bound()},
                          {"sigma_inv_bound", ctx_.model().sigma_inv_bound()},
                          {"n", e.n},
                          {"max_sigma_norm", e.max_sigma_norm},
                          {"max_sigma_inv_norm", e.max_sigma_inv_norm},
                          {"pass", e.pass}};
      verdict("dissipativity", d.pass);
      verdict("ellipticity", e.pass);
    });
  }

  void ergodicity() {
    stage("ergodicity", [&] {
      const auto& n = ctx_.n();
      const Segment start = Segment::constant(ctx_.shape(), n.ergodicity_initial);
      const auto mode = n.ergodicity_mode == "stationary" ? CurveMode::stationary : CurveMode::coupled;
      const auto curve = ergodicity_curve(ctx_.model(), start, ctx_.stationary(n.n_traj),
                                          n.ergodicity_times, ctx_.cfg().metric,
                                          ctx_.ensemble(n.n_traj), ctx_.curve_options(mode));
      std::vector<bool> usable(curve.usable.begin(), curve.usable.end());
      std::vector<double> kept;
      for (std::size_t i = 0; i < usable.size(); ++i) {
        if (usable[i]) kept.push_back(curve.distances[i]);
      }
      const double decay = kept.size() >= 2 ? kept.front() / kept.back() : 0.0;

      const auto mom = moment_curve(ctx_.model(), start, n.moment_p, n.ergodicity_times,
                                    ctx_.ensemble(n.n_traj));

      json& s = payload_["ergodicity"];
      s["mode"] = n.ergodicity_mode;
      s["times"] = curve.times;
      s["distances"] = curve.distances;
      s["std_errors"] = curve.std_errors;
      s["usable"] = usable;
      s["noise_floor"] = curve.noise_floor;
      s["dropped_nonpositive"] = curve.dropped_nonpositive;
      s["dropped_floor"] = curve.dropped_floor;
      s["blocks"] = curve.blocks;
      s["fit"] = to_json(curve.fit);
      s["flat"] = curve.flat;
      s["decay_ratio"] = decay;
      s["moments"] = {{"p", mom.p},           {"times", mom.times},       {"values", mom.values},
                      {"std_errors", mom.std_errors}, {"c_hat", mom.c_hat}, {"beta_hat", mom.beta_hat},
                      {"envelope", mom.envelope},     {"bounded", mom.bounded}};
      verdict("ergodicity_rate", !curve.flat && curve.fit.beta_hat > 0.0 &&
                                     curve.fit.r_squared >= 0.8 && decay >= 10.0);
      verdict("moment_bound", mom.bounded);
    });
  }

  void slln() {
    stage("slln", [&] {
      const auto& n = ctx_.n();
      const auto& f = ctx_.f();
      const auto rep = slln_variance_decay(ctx_.sg(), f, ctx_.xi0(), n.slln_times, n.replicas,
                                           ctx_.stream(tag::slln_decay));
      const auto path = slln_pathwise(ctx_.sg(), f, ctx_.xi0(), n.slln_eps, n.slln_horizon,
                                      n.slln_path_replicas, ctx_.stream(tag::slln_path),
                                      n.slln_checkpoints);
      json& s = payload_["slln"];
      s["centering"] = {{"mu_f", f.mu_f}, {"se", f.mu_f_se}, {"paths", f.sample_size}};
      s["times"] = rep.times;
      s["sq_errors"] = rep.sq_errors;
      s["std_errors"] = rep.std_errors;
      s["slope"] = {{"value", rep.slope}, {"se", rep.slope_se}, {"lo", rep.slope_lo}, {"hi", rep.slope_hi}};
      s["intercept"] = rep.intercept;
      s["c_env"] = rep.c_env;
      s["zero_signal"] = rep.zero_signal;
      s["pathwise"] = {{"eps", path.eps},
                       {"horizon", path.horizon},
                       {"c_eps", path.c_eps},
                       {"statistic_quantiles", path.statistic_quantiles},
                       {"violation_quantiles", path.violation_quantiles},
                       {"late_ratio_median", path.late_ratio_median}};
      verdict("slln_slope", rep.slope >= -1.25 && rep.slope <= -0.75);
    });
  }

  void clt() {
    stage("clt", [&] {
      const auto& n = ctx_.n();
      const auto& f = ctx_.f();
      const auto cc = ctx_.corrector();
      const auto var = variance_D(ctx_.sg(), f, ctx_.atoms(), IncrementKind::continuous, cc,
                                  ctx_.stream(tag::variance));
      const auto vph = vph_residual(ctx_.sg(), f, ctx_.xi0(), n.vph_outer, cc, ctx_.stream(tag::vph));
      const auto rep = clt_test(ctx_.sg(), f, ctx_.xi0(), n.clt_times, n.clt_replicas, var.d(),
                                ctx_.stream(tag::clt));

      json& s = payload_["clt"];
      s["rate"] = to_json(cc.rate.value());
      s["corrector_horizon"] = corrector_horizon(cc);
      s["variance"] = {{"d2", to_json(var.d2)},
                       {"cross_check", to_json(var.cross_check)},
                       {"diff_se", var.diff_se},
                       {"discrepancy_z", var.discrepancy_z},
                       {"atoms", var.atoms}};
      s["vph"] = {{"residual", to_json(vph.residual)}, {"phi", to_json(vph.phi)},
                  {"p1_r2", to_json(vph.p1_r2)},       {"r2", to_json(vph.r2)},
                  {"integral_term", to_json(vph.integral_term)}};
      s["d_f"] = rep.d_f;
      s["degenerate"] = rep.degenerate;
      s["replicas"] = rep.replicas;
      s["times"] = rep.times;
      s["statistics"] = rep.statistics;
      s["statistic_se"] = rep.statistic_se;
      s["non_increasing"] = rep.non_increasing;

      verdict("variance_identity", std::fabs(var.discrepancy_z) <= 3.0);
      verdict("vph_identity", std::fabs(vph.residual.value) <= 3.0 * vph.residual.se);
      const bool ks_ok = !rep.statistics.empty() && rep.statistics.back() <= 0.05;
      const bool mono = !rep.statistics.empty() &&
                        rep.statistics.back() <= rep.statistics.front() + 2.0 * rep.statistic_se;
      verdict("clt_ks", ks_ok);
      verdict("clt_decay", mono);
    });
  }

  void lil() {
    stage("lil", [&] {
      const auto& n = ctx_.n();
      const auto& f = ctx_.f();
      const auto cc = ctx_.corrector();
      json& s = payload_["lil"];

      std::optional<VarianceReport> var;
      try {
        var = variance_D(ctx_.sg(), f, ctx_.atoms(), IncrementKind::discrete, cc,
                         ctx_.stream(tag::variance_hat));
      } catch (const EstimatorInconsistency& e) {
        s["failure"] = e.what();
      }
      if (var && !(var->d2.value > 0.0)) {
        std::ostringstream os;
        os << "limit variance estimate " << var->d2.value << " (se " << var->d2.se
           << ") is not positive; LIL normalization undefined";
        s["failure"] = os.str();
      }
      if (var) {
        s["d_hat2"] = to_json(var->d2);
        s["cross_check"] = to_json(var->cross_check);
        s["discrepancy_z"] = var->discrepancy_z;
      }
      if (s.contains("failure")) {
        verdict("lil_variance_positive", false);
        return;
      }
      verdict("lil_variance_positive", true);

      const double d_hat = var->d();
      const auto checkpoints = lil_checkpoints(n.lil_n_max, n.lil_checkpoints);
      const auto rep = lil_run(ctx_.sg(), f, ctx_.xi0(), n.lil_n_max, d_hat, checkpoints,
                               ctx_.stream(tag::lil));
      s["d_hat"] = rep.d_hat;
      s["n_grid"] = rep.n_grid;
      s["normalized_sums"] = rep.normalized_sums;
      s["running_max"] = rep.running_max;
      s["running_min"] = rep.running_min;
      s["sup_norm_of_lambda"] = rep.sup_norm_of_lambda;
      s["endpoint_identity"] = rep.endpoint_identity;

      const auto qv = quadratic_variation(ctx_.sg(), f, ctx_.xi0(), n.qv_n, QvKind::discrete, cc,
                                          ctx_.stream(tag::qv));
      const auto lln = qv_lln_check(ctx_.sg(), f, ctx_.xi0(), n.qv_n, var->d2, n.qv_sum_replicas, cc,
                                    ctx_.stream(tag::qv_lln));
      const double z_qv = joint_z(qv.per_step, var->d2);
      s["quadratic_variation"] = {{"n", n.qv_n},
                                  {"qv_over_n", to_json(qv.per_step)},
                                  {"z_qv", z_qv},
                                  {"mean_square", to_json(lln.mean_square)},
                                  {"z_mean_square", lln.z_mean_square},
                                  {"s_n2_over_n", to_json(lln.s_n2_over_n)},
                                  {"z_s_n2", lln.z_s_n2}};

      const double hi = rep.running_max.back();
      const double lo = rep.running_min.back();
      verdict("lil_band", hi >= 0.6 * d_hat && hi <= 1.4 * d_hat && lo <= -0.6 * d_hat &&
                              lo >= -1.4 * d_hat);
      verdict("lil_endpoint_identity", rep.endpoint_identity);
      verdict("lil_lambda_sup", rep.sup_norm_of_lambda.back() <= 1.5);
      verdict("qv_lln", std::fabs(z_qv) <= 3.0 && lln.pass);
    });
  }

  json finish() {
    bool all = true;
    for (const auto& [k, v] : verdicts_.items()) all = all && v.get<bool>();
    payload_["verdicts"] = verdicts_;
    payload_["passed"] = all;
    return std::move(payload_);
  }

private:
  void verdict(const std::string& name, bool ok) { verdicts_[name] = ok; }

  void stage(const std::string& name, const std::function<void()>& body) {
    try {
      body();
    } catch (...) {
      const int code = classify_exception(std::current_exception());
      std::throw_with_nested(ExperimentError(
          "experiment '" + to_string(ctx_.cfg().kind) + "' failed in stage '" + name + "'", code));
    }
  }

  Context ctx_;
  json payload_ = json::object();
  json verdicts_ = json::object();
};

} // namespace

int classify_exception(std::exception_ptr e) {
  try {
    std::rethrow_exception(e);
  } catch (const ExperimentError& x) {
    return x.code();
  } catch (const ConfigError&) {
    return exit_code::config;
  } catch (const NumericError&) {
    return exit_code::numeric;
  } catch (const EstimatorInconsistency&) {
    return exit_code::statistical;
  } catch (const EllipticityViolation&) {
    return exit_code::statistical;
  } catch (const RangeError&) {
    return exit_code::config;
  } catch (const ShapeError&) {
    return exit_code::config;
  } catch (const CapacityError&) {
    return exit_code::config;
  } catch (const DomainError&) {
    return exit_code::config;
  } catch (const nlohmann::json::exception&) {
    return exit_code::config;
  } catch (...) {
    return exit_code::internal;
  }
}

std::string describe_exception(const std::exception& e) {
  std::string out = e.what();
  try {
    std::rethrow_if_nested(e);
  } catch (const std::exception& inner) {
    out += "\n  caused by: " + describe_exception(inner);
  } catch (...) {
    out += "\n  caused by: unknown error";
  }
  return out;
}

ReportRecord run_experiment(const ExperimentConfig& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  Pipeline p(cfg);
  switch (cfg.kind) {
    case ExperimentKind::assumptions: p.assumptions(); break;
    case ExperimentKind::ergodicity: p.ergodicity(); break;
    case ExperimentKind::slln: p.slln(); break;
    case ExperimentKind::clt: p.clt(); break;
    case ExperimentKind::lil: p.lil(); break;
    case ExperimentKind::full_suite:
      p.assumptions();
      p.ergodicity();
      p.slln();
      p.clt();
      p.lil();
      break;
  }
  ReportRecord rec;
  rec.config = config_echo(cfg);
  rec.payload = p.finish();
  rec.passed = rec.payload["passed"].get<bool>();
  rec.seed = cfg.master_seed;
  seal(rec);
  rec.wall_clock_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

ReportRecord run_and_write(const ExperimentConfig& cfg, const std::filesystem::path& dir) {
  auto rec = run_experiment(cfg);
  write_report(rec, dir);
  emit_plot_data(rec, dir);
  return rec;
}

} // namespace segflow
