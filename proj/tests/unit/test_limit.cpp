#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "helpers.hpp"
#include "segflow/core/errors.hpp"
#include "segflow/core/stats.hpp"
#include "segflow/limit/clt.hpp"
#include "segflow/limit/corrector.hpp"
#include "segflow/limit/lil.hpp"
#include "segflow/limit/martingale.hpp"
#include "segflow/limit/semigroup.hpp"
#include "segflow/limit/slln.hpp"

using namespace segflow;

namespace {

const double kLn2 = std::log(2.0);
const SegmentShape kUnitShape = SegmentShape::make(1, 0.5, 1.0 / 32.0);

CenteredObservable x0() { return centered(eval0_observable(), 0.0); }
CenteredObservable zero() { return centered(constant_observable(0.0), 0.0); }

CorrectorConfig exact_cfg(double c, double beta) {
  CorrectorConfig cc;
  cc.rate = fixtures::rate_of(c, beta);
  cc.t_max = 40.0;
  cc.k_max = 80;
  cc.tail_tolerance = 1e-9;
  return cc;
}

CorrectorConfig reference_cfg() {
  CorrectorConfig cc;
  cc.rate = fixtures::rate_of(14.6, 1.72);
  cc.inner_replicas = 32;
  return cc;
}

Trajectory ramp(double horizon, double step, double delay) {
  const auto shape = SegmentShape::make(1, delay, step);
  std::vector<double> v;
  const auto n = grid_steps(horizon, step) + shape.nodes();
  for (std::size_t k = 0; k < n; ++k) v.push_back(-delay + step * static_cast<double>(k));
  return Trajectory("ramp", shape, horizon, v, RngStream(1, 0));
}

} // namespace

TEST(Kernels, TelegraphExactSeriesAndPaths) {
  const TelegraphKernel tk(kUnitShape, 0.5);
  const auto plus = Segment::constant(kUnitShape, 1.0);
  const auto ex = tk.exact_series(eval0_observable(), plus, 0.5, 4);
  ASSERT_TRUE(ex);
  for (std::size_t k = 0; k <= 4; ++k) EXPECT_NEAR((*ex)[k], std::exp(-0.5 * k), 1e-15);
  // Simulated paths reproduce the law.
  Welford w;
  for (std::uint64_t r = 0; r < 20000; ++r) {
    double last = 0.0;
    tk.walk(plus, 1.0, 1, RngStream(3, r), [&](std::size_t, const SegmentView& x) { last = x.now(); });
    w.add(last);
  }
  EXPECT_NEAR(w.mean(), std::exp(-1.0), 4.0 * w.std_error());
}

TEST(Kernels, RegistryBuildsByName) {
  const auto k = make_kernel("telegraph", kUnitShape, {{"kappa", 2.0}});
  EXPECT_EQ(k->name(), "telegraph");
  EXPECT_THROW(make_kernel("nope", kUnitShape), ConfigError);
}

TEST(Slln, AdditiveFunctionalExamples) {
  const auto traj = ramp(2.0, 0.25, 0.5);
  EXPECT_DOUBLE_EQ(additive_functional(traj, constant_observable(1.0), 2.0), 1.0);
  EXPECT_NEAR(additive_functional(traj, eval0_observable(), 2.0), 1.0, 0.25 * 0.25);
  EXPECT_NEAR(additive_functional(traj, eval0_observable(), 1.1), 0.55, 0.25 * 0.25);

  const auto model = fixtures::scalar_model(0.0, 0.0, 0.0, 0.5);
  const auto flat = simulate(model, Segment::constant(model.shape(0.25), -3.0), 2.0, 0.25, RngStream(1, 0));
  EXPECT_DOUBLE_EQ(additive_functional(flat, eval0_observable(), 2.0), -3.0);
}

TEST(Slln, ZeroFunctionHasZeroSignal) {
  const auto model = fixtures::reference_model();
  const SdeEvaluator sg(model, 1.0 / 32.0);
  const std::vector<double> times{4, 8, 16, 40};
  const auto rep = slln_variance_decay(sg, zero(), Segment::constant(sg.shape(), 1.0), times, 100, RngStream(1, 0));
  EXPECT_TRUE(rep.zero_signal);
  for (double v : rep.sq_errors) EXPECT_EQ(v, 0.0);

  const auto path = slln_pathwise(sg, zero(), Segment::constant(sg.shape(), 1.0), 0.25, 64.0, 20, RngStream(1, 1));
  for (double v : path.statistic) EXPECT_EQ(v, 0.0);
}

TEST(Slln, ReseedingMovesPointsWithinNoise) {
  const auto model = fixtures::reference_model();
  const SdeEvaluator sg(model, 1.0 / 64.0);
  const std::vector<double> times{4, 8, 16, 40};
  const auto xi = Segment::constant(sg.shape(), 0.0);
  const auto a = slln_variance_decay(sg, x0(), xi, times, 300, RngStream(1, 0));
  const auto b = slln_variance_decay(sg, x0(), xi, times, 300, RngStream(2, 0));
  for (std::size_t k = 0; k < times.size(); ++k) {
    EXPECT_LT(std::fabs(a.sq_errors[k] - b.sq_errors[k]), 3.0 * std::hypot(a.std_errors[k], b.std_errors[k]));
  }
  EXPECT_LT(a.slope, -0.5);
}

TEST(Slln, PathwiseStatisticDecreasesInEps) {
  const std::vector<double> times{1.0, 2.0, 5.0, 10.0, 40.0};
  const std::vector<double> abs_a{0.9, 0.4, 0.3, 0.1, 0.07};
  double prev = INFINITY;
  for (double eps : {0.05, 0.1, 0.25, 0.4, 0.49}) {
    const double s = pathwise_statistic(times, abs_a, eps);
    EXPECT_LE(s, prev);
    prev = s;
  }
}

TEST(Corrector, ExponentialKernelIntegratesToOne) {
  const TelegraphKernel tk(kUnitShape, 0.5);
  const auto cc = exact_cfg(1.0, 1.0);
  const auto r = corrector(tk, x0(), Segment::constant(kUnitShape, 1.0), cc, RngStream(1, 0));
  EXPECT_NEAR(r.value, 1.0, 1e-3 + r.tail_bound);
  EXPECT_EQ(r.se, 0.0);
  const auto z = corrector(tk, zero(), Segment::constant(kUnitShape, 1.0), cc, RngStream(1, 0));
  EXPECT_EQ(z.value, 0.0);
}

TEST(Corrector, GeometricKernelSumsToTwo) {
  const TelegraphKernel tk(kUnitShape, kLn2 / 2.0);
  const auto cc = exact_cfg(1.0, kLn2);
  const auto xi = Segment::constant(kUnitShape, 1.0);
  const auto r = discrete_corrector(tk, x0(), xi, cc, RngStream(1, 0));
  EXPECT_NEAR(r.value, 2.0, 1e-8 + r.tail_bound);
  // One-step shift: R^(xi) = f(xi) + P_1 R^(xi), and P_1 R^ = sum_{k>=1} P_k f.
  const auto tail = corrector_sample(tk, eval0_observable(), xi, IncrementKind::discrete, cc, RngStream(1, 0));
  EXPECT_NEAR(r.value, 1.0 + tail.value, 1e-12);
}

TEST(Corrector, MissingRateIsAConfigError) {
  const TelegraphKernel tk(kUnitShape, 0.5);
  CorrectorConfig cc;
  EXPECT_THROW(corrector(tk, x0(), Segment::constant(kUnitShape, 1.0), cc, RngStream(1, 0)), ConfigError);
}

TEST(Corrector, ReferenceModelMatchesDelayOdeMean) {
  const auto model = fixtures::reference_model();
  const double dt = 1.0 / 128.0;
  const SdeEvaluator sg(model, dt);
  auto cc = reference_cfg();
  cc.inner_replicas = 512;
  const auto r = corrector(sg, x0(), Segment::constant(sg.shape(), 1.0), cc, RngStream(5, 0));
  // E X(t) solves the delay ODE; integrate its trapezoid on the same horizon.
  const auto m = fixtures::delay_ode_reference(2.0, 0.1, 0.5, r.horizon, 64);
  double integral = 0.0;
  const double h = 0.5 / 64.0;
  for (std::size_t k = 0; k + 1 < m.size(); ++k) integral += 0.5 * h * (m[k] + m[k + 1]);
  EXPECT_NEAR(r.value, integral, 3.0 * r.se + 0.02);
}

TEST(Phi, SignFlipAndZero) {
  const auto model = fixtures::reference_model();
  const SdeEvaluator sg(model, 1.0 / 64.0);
  const auto cc = reference_cfg();
  const auto xi = Segment::constant(sg.shape(), 0.3);
  const auto neg = centered(linear_combination({-1.0}, {eval0_observable()}), 0.0);
  const auto a = phi_f(sg, x0(), xi, cc, RngStream(2, 0));
  const auto b = phi_f(sg, neg, xi, cc, RngStream(2, 0));
  EXPECT_NEAR(a.value, b.value, 1e-12 * std::fabs(a.value));
  EXPECT_EQ(phi_f(sg, zero(), xi, cc, RngStream(2, 0)).value, 0.0);
}

TEST(Phi, PositiveAndStableUnderMoreReplicas) {
  const auto model = fixtures::reference_model();
  const SdeEvaluator sg(model, 1.0 / 128.0);
  auto cc = reference_cfg();
  cc.outer_replicas = 128;
  const auto xi = Segment::constant(sg.shape(), 0.0);
  const auto a = phi_f(sg, x0(), xi, cc, RngStream(3, 0));
  cc.outer_replicas = 256;
  const auto b = phi_f(sg, x0(), xi, cc, RngStream(3, 1));
  EXPECT_GT(a.value, 0.0);
  EXPECT_NEAR(b.value / a.value, 1.0, 0.1 + 3.0 * std::hypot(a.se, b.se) / a.value);
}

TEST(VarianceD, ZeroAndHomogeneity) {
  const auto model = fixtures::reference_model();
  const SdeEvaluator sg(model, 1.0 / 64.0);
  const auto cc = reference_cfg();
  EnsembleConfig ec;
  ec.n_traj = 12;
  ec.step = 1.0 / 64.0;
  const auto st = sample_invariant(model, ec, Segment::constant(sg.shape(), 0.0));
  const auto z = variance_D(sg, zero(), st, IncrementKind::continuous, cc, RngStream(4, 0));
  EXPECT_EQ(z.d2.value, 0.0);
  EXPECT_EQ(z.cross_check.value, 0.0);

  const auto two = centered(linear_combination({2.0}, {eval0_observable()}), 0.0);
  for (auto kind : {IncrementKind::continuous, IncrementKind::discrete}) {
    const auto a = variance_D(sg, x0(), st, kind, cc, RngStream(4, 1));
    const auto b = variance_D(sg, two, st, kind, cc, RngStream(4, 1));
    EXPECT_NEAR(b.d2.value, 4.0 * a.d2.value, 1e-9 * std::fabs(a.d2.value));
    EXPECT_NEAR(b.cross_check.value, 4.0 * a.cross_check.value, 1e-9 * std::fabs(a.cross_check.value));
  }
}

TEST(VarianceD, TelegraphClosedForm) {
  // kappa = 1/2: R = f, phi = E|int_0^1 X + X_1 - x|^2, and mu(phi) = 2 mu(f R) = 2.
  const TelegraphKernel tk(kUnitShape, 0.5);
  auto cc = exact_cfg(1.0, 1.0);
  cc.outer_replicas = 64;
  std::vector<Segment> atoms;
  for (int i = 0; i < 32; ++i) atoms.push_back(Segment::constant(kUnitShape, i % 2 ? 1.0 : -1.0));
  const auto rep = variance_D(tk, x0(), EmpiricalMeasure(atoms), IncrementKind::continuous, cc, RngStream(6, 0));
  EXPECT_NEAR(rep.cross_check.value, 2.0, 1e-3);
  EXPECT_LE(std::fabs(rep.d2.value - 2.0), 3.0 * rep.d2.se + 1e-3);
}

TEST(Vph, ZeroAndExponentialKernel) {
  const TelegraphKernel tk(kUnitShape, 0.5);
  const auto cc = exact_cfg(1.0, 1.0);
  const auto xi = Segment::constant(kUnitShape, 1.0);
  const auto z = vph_residual(tk, zero(), xi, 64, cc, RngStream(7, 0));
  EXPECT_EQ(z.residual.value, 0.0);
  const auto r = vph_residual(tk, x0(), xi, 4000, cc, RngStream(7, 1));
  EXPECT_LE(std::fabs(r.residual.value), 3.0 * r.residual.se + 1e-3);
}

TEST(Clt, DegenerateAndDkwScale) {
  EXPECT_EQ(weighted_ks_degenerate(std::vector<double>(50, 0.0)), 0.0);
  const auto model = fixtures::reference_model();
  const SdeEvaluator sg(model, 1.0 / 32.0);
  const std::vector<double> times{4.0};
  const auto rep = clt_test(sg, zero(), Segment::constant(sg.shape(), 0.0), times, 50, 0.0, RngStream(1, 0));
  EXPECT_TRUE(rep.degenerate);
  EXPECT_EQ(rep.statistics[0], 0.0);
  EXPECT_THROW(clt_test(sg, x0(), Segment::constant(sg.shape(), 0.0), times, 50, -1.0, RngStream(1, 0)), DomainError);

  // Direct normal draws: the KS statistic has mean sqrt(pi/2) ln 2 / sqrt(n)
  // and standard deviation ks_standard_error(n).
  const std::size_t n = 500;
  const double sd = 0.7;
  Welford ks;
  for (std::uint64_t rep_i = 0; rep_i < 400; ++rep_i) {
    const RngStream s(11, rep_i);
    std::vector<double> xs(n);
    for (std::size_t i = 0; i < n; ++i) xs[i] = sd * s.normal(i, 0, 1);
    ks.add(ks_statistic_normal(xs, sd));
  }
  const double mean = std::sqrt(M_PI / 2.0) * kLn2 / std::sqrt(static_cast<double>(n));
  EXPECT_NEAR(ks.mean() / mean, 1.0, 0.05);
  EXPECT_NEAR(std::sqrt(ks.variance()) / ks_standard_error(n), 1.0, 0.15);
}

TEST(Martingale, IidKernelIncrementsAreTheObservable) {
  const IidKernel k(kUnitShape, 2.0);
  const auto cc = exact_cfg(1.0, 5.0);
  const auto m = martingale_increments(k, x0(), Segment::constant(kUnitShape, 0.4), 40, cc, RngStream(8, 0));
  ASSERT_EQ(m.z.size(), 40u);
  for (std::size_t i = 0; i < m.z.size(); ++i) EXPECT_EQ(m.z[i], m.f_values[i + 1]);
  const auto z = martingale_increments(k, zero(), Segment::constant(kUnitShape, 0.4), 10, cc, RngStream(8, 0));
  for (double v : z.z) EXPECT_EQ(v, 0.0);
}

TEST(Martingale, ConditionalMeanIsZero) {
  // kappa = ln2/2: Rt(x) = x, so Z_1 = 2 X_1 - xi with E[X_1 | xi] = xi / 2.
  const TelegraphKernel tk(kUnitShape, kLn2 / 2.0);
  const auto cc = exact_cfg(1.0, kLn2);
  const auto xi = Segment::constant(kUnitShape, 1.0);
  Welford w;
  for (std::uint64_t r = 0; r < 4000; ++r) {
    w.add(martingale_increments(tk, x0(), xi, 1, cc, RngStream(9, r)).z[0]);
  }
  EXPECT_LE(std::fabs(w.mean()), 3.0 * w.std_error());
}

TEST(Martingale, TelescopingOnReferenceModel) {
  const auto model = fixtures::reference_model();
  const SdeEvaluator sg(model, 1.0 / 32.0);
  auto cc = reference_cfg();
  cc.inner_replicas = 8;
  const auto m = martingale_increments(sg, x0(), Segment::constant(sg.shape(), 0.0), 20, cc, RngStream(10, 0));
  EXPECT_NEAR(telescoped_sum(m), m.partial_sums.back(), 1e-12);
}

TEST(QuadraticVariation, SingleTermIsPhi) {
  const auto model = fixtures::reference_model();
  const SdeEvaluator sg(model, 1.0 / 32.0);
  auto cc = reference_cfg();
  cc.inner_replicas = 8;
  cc.outer_replicas = 8;
  const auto xi = Segment::constant(sg.shape(), 0.2);
  const RngStream rng(12, 0);
  const auto qv = quadratic_variation(sg, x0(), xi, 1, QvKind::continuous, cc, rng);
  EXPECT_EQ(qv.sum, phi_f(sg, x0(), xi, cc, rng.child(1)).value);
  const auto qd = quadratic_variation(sg, x0(), xi, 1, QvKind::discrete, cc, rng);
  EXPECT_EQ(qd.sum, phi_hat_f(sg, x0(), xi, cc, rng.child(1)).value);
  const auto q0 = quadratic_variation(sg, zero(), xi, 3, QvKind::discrete, cc, rng);
  EXPECT_EQ(q0.sum, 0.0);
}

TEST(QuadraticVariation, IidKernelRatiosMatchVariance) {
  const IidKernel k(kUnitShape, 2.0);
  const auto cc = exact_cfg(1.0, 5.0);
  const auto rep = qv_lln_check(k, x0(), Segment::constant(kUnitShape, 0.0), 256, Estimate{2.0, 0.0}, 400, cc,
                                RngStream(13, 0));
  EXPECT_TRUE(rep.pass) << rep.z_mean_square << " " << rep.z_s_n2;
  EXPECT_LE(std::fabs(rep.mean_square.value - 2.0), 3.0 * rep.mean_square.se);
  EXPECT_LE(std::fabs(rep.s_n2_over_n.value - 2.0), 3.0 * rep.s_n2_over_n.se);
}

TEST(Lil, LambdaIdentities) {
  const std::vector<double> f{0.5, -1.0, 2.0, 0.25, -0.75, 1.5, 0.1, -0.3};
  std::vector<double> prefix{0.0};
  for (double v : f) prefix.push_back(prefix.back() + v);
  const std::size_t n = f.size();
  const double d = 0.8;
  EXPECT_EQ(lil_lambda(prefix, f, n, 0.0, d), 0.0);
  const double direct = prefix[n - 1] / (d * lil_scale(n));
  EXPECT_EQ(lil_lambda(prefix, f, n, 1.0, d), direct);
  // Linear between nodes.
  const double mid = lil_lambda(prefix, f, n, 2.5 / n, d);
  EXPECT_NEAR(mid, 0.5 * (lil_lambda(prefix, f, n, 2.0 / n, d) + lil_lambda(prefix, f, n, 3.0 / n, d)), 1e-15);
}

TEST(Lil, RunReportsEndpointIdentity) {
  const IidKernel k(kUnitShape, 1.0);
  const auto cps = lil_checkpoints(5000, 20);
  EXPECT_EQ(cps.front(), 16u);
  EXPECT_EQ(cps.back(), 5000u);
  const auto rep = lil_run(k, x0(), Segment::constant(kUnitShape, 0.0), 5000, 1.0, cps, RngStream(14, 0));
  EXPECT_TRUE(rep.endpoint_identity);
  for (std::size_t i = 0; i < rep.n_grid.size(); ++i) {
    EXPECT_EQ(rep.endpoint_lambda[i], rep.endpoint_direct[i]);
    EXPECT_GE(rep.running_max[i], rep.normalized_sums[i]);
    EXPECT_LE(rep.running_min[i], rep.normalized_sums[i]);
  }
  EXPECT_THROW(lil_run(k, x0(), Segment::constant(kUnitShape, 0.0), 100, 0.0, cps, RngStream(14, 0)), DomainError);
}

TEST(CameronMartin, Examples) {
  const auto unit = cameron_martin_norm(std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
  EXPECT_NEAR(unit.norm, 1.0, 1e-15);
  EXPECT_TRUE(unit.member);
  const auto steep = cameron_martin_norm(std::vector<double>{0.0, 1.0, 2.0});
  EXPECT_NEAR(steep.norm, 4.0, 1e-15);
  EXPECT_FALSE(steep.member);
  const auto bent = cameron_martin_norm(std::vector<double>{0.0, 0.5, 0.5});
  EXPECT_NEAR(bent.norm, 0.5, 1e-15);
  EXPECT_TRUE(bent.member);
  EXPECT_THROW(cameron_martin_norm(std::vector<double>{0.1, 0.5}), DomainError);
}
