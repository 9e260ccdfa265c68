#include <gtest/gtest.h>

#include <cmath>

#include "helpers.hpp"
#include "segflow/core/errors.hpp"
#include "segflow/ergodic/ensemble.hpp"
#include "segflow/ergodic/moments.hpp"

using namespace segflow;

namespace {

EnsembleConfig small(std::size_t n) {
  EnsembleConfig ec;
  ec.n_traj = n;
  ec.step = 1.0 / 64.0;
  ec.burn_in = 5.0;
  return ec;
}

} // namespace

TEST(Invariant, FrozenDynamicsKeepsInitial) {
  const auto model = fixtures::scalar_model(0.0, 0.0, 0.0, 0.5);
  const auto st = sample_invariant(model, small(16), Segment::constant(model.shape(1.0 / 64.0), 1.5));
  for (const auto& a : st.atoms()) {
    for (double v : a.values()) EXPECT_EQ(v, 1.5);
  }
}

TEST(Invariant, ReferenceMeanAndVariance) {
  const auto model = fixtures::reference_model();
  auto ec = small(4096);
  ec.step = 1.0 / 128.0;
  const auto shape = model.shape(ec.step);
  const auto st = sample_invariant(model, ec, Segment::constant(shape, 0.0));
  std::vector<double> x0;
  for (const auto& a : st.atoms()) x0.push_back(a.view().now());
  const auto m = mean_estimate(x0);
  EXPECT_LE(std::fabs(m.value), 3.0 * m.se);

  // Second moment against a long single-path time average.
  TimeAverageConfig tc;
  tc.n_traj = 8;
  tc.horizon = 2048.0;
  tc.step = ec.step;
  Observable sq{"sq", [](const SegmentView& x) { return x.now() * x.now(); }, {}};
  const auto oracle = stationary_average(model, sq, Segment::constant(shape, 0.0), tc);
  const double var = sample_variance(x0);
  EXPECT_NEAR(var / oracle.value, 1.0, 0.05);
}

TEST(Invariant, ThinningGivesSeveralSamplesPerPath) {
  const auto model = fixtures::reference_model();
  auto ec = small(4);
  ec.samples_per_traj = 3;
  ec.thinning = 0.5;
  const auto st = sample_invariant(model, ec, Segment::constant(model.shape(ec.step), 0.0));
  EXPECT_EQ(st.size(), 12u);
  EXPECT_THROW(
      [&] {
        auto bad = ec;
        bad.thinning = 0.3;
        sample_invariant(model, bad, Segment::constant(model.shape(ec.step), 0.0));
      }(),
      RangeError);
}

TEST(RateFit, ExactExponential) {
  const std::vector<double> t{0.5, 1.0, 2.0, 3.0};
  std::vector<double> v;
  for (double s : t) v.push_back(3.0 * std::exp(-1.5 * s));
  const auto fit = fit_rate(t, v);
  EXPECT_NEAR(fit.beta_hat, 1.5, 1e-12);
  EXPECT_NEAR(fit.c_hat, 3.0, 1e-12);
  EXPECT_NEAR(fit.at(2.0), v[2], 1e-12);
}

TEST(ErgodicityCurve, StationaryStartIsFlagged) {
  const auto model = fixtures::reference_model();
  auto ec = small(512);
  ec.step = 1.0 / 128.0;
  const auto shape = model.shape(ec.step);
  const auto st = sample_invariant(model, ec, Segment::constant(shape, 0.0));
  auto ea = ec;
  ea.n_traj = 256;
  const std::vector<double> times{1.0, 2.0, 3.0, 4.0};
  CurveOptions opts;
  opts.mode = CurveMode::stationary;
  const auto curve = ergodicity_curve(model, st[0], st, times, {2.0, 1.0}, ea, opts);
  EXPECT_GT(curve.noise_floor, 0.0);
  EXPECT_TRUE(curve.flat);
}

TEST(ErgodicityCurve, ReferenceDecayAndScaling) {
  const auto model = fixtures::reference_model();
  auto ec = small(1024);
  ec.step = 1.0 / 128.0;
  const auto shape = model.shape(ec.step);
  const auto st = sample_invariant(model, ec, Segment::constant(shape, 0.0));
  const std::vector<double> times{0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0};
  const auto c5 = ergodicity_curve(model, Segment::constant(shape, 5.0), st, times, {2.0, 1.0}, ec);
  const auto c10 = ergodicity_curve(model, Segment::constant(shape, 10.0), st, times, {2.0, 1.0}, ec);
  ASSERT_FALSE(c5.flat);
  ASSERT_FALSE(c10.flat);
  EXPECT_GT(c5.fit.beta_hat, 0.0);
  EXPECT_GE(c5.fit.r_squared, 0.8);
  EXPECT_LE(std::fabs(c5.fit.beta_hat - c10.fit.beta_hat),
            3.0 * std::hypot(c5.fit.beta_se, c10.fit.beta_se));
  EXPECT_GT(c10.fit.c_hat, c5.fit.c_hat);
}

TEST(Moments, FrozenDynamicsGivesConstantSeries) {
  const auto model = fixtures::scalar_model(0.0, 0.0, 0.0, 0.5);
  const std::vector<double> times{0.5, 1.0, 2.0};
  const auto mc = moment_curve(model, Segment::constant(model.shape(1.0 / 64.0), -2.0), 3.0, times, small(8));
  for (double v : mc.values) EXPECT_DOUBLE_EQ(v, 8.0);
  EXPECT_TRUE(mc.bounded);
}

TEST(Moments, DecayTowardStationarySecondMoment) {
  const auto model = fixtures::reference_model();
  auto ec = small(2048);
  ec.step = 1.0 / 128.0;
  const auto shape = model.shape(ec.step);
  const std::vector<double> times{0.5, 1.0, 2.0, 4.0, 6.0};
  const auto mc = moment_curve(model, Segment::constant(shape, 5.0), 2.0, times, ec);
  EXPECT_TRUE(mc.bounded);
  const auto st = sample_invariant(model, ec, Segment::constant(shape, 0.0));
  std::vector<double> sq;
  for (const auto& a : st.atoms()) sq.push_back(std::pow(sup_norm(a), 2));
  EXPECT_NEAR(mc.values.back() / mean_estimate(sq).value, 1.0, 0.1);

  const std::vector<double> long_times{1.0, 5.0, 10.0};
  const auto m4 = moment_curve(model, Segment::constant(shape, 5.0), 4.0, long_times, small(512));
  for (double v : m4.values) EXPECT_TRUE(std::isfinite(v));
  EXPECT_TRUE(m4.bounded);

  // Jensen: E||X||  <= sqrt(E||X||^2).
  const auto m1 = moment_curve(model, Segment::constant(shape, 5.0), 1.0, times, ec);
  for (std::size_t k = 0; k < times.size(); ++k) {
    EXPECT_LE(m1.values[k], std::sqrt(mc.values[k]) + 3.0 * m1.std_errors[k]);
  }
}

TEST(ExpMoments, ZeroPathPassesEverything) {
  const auto model = fixtures::scalar_model(1.0, 0.0, 0.0, 0.5);
  const std::vector<double> deltas{0.1, 1.0, 10.0};
  const auto probe = exp_moment_probe(model, Segment::constant(model.shape(1.0 / 64.0), 0.0), deltas, 3, small(16));
  for (char ok : probe.passed) EXPECT_TRUE(ok);
  ASSERT_TRUE(probe.largest_passing);
  EXPECT_EQ(*probe.largest_passing, 10.0);
}

TEST(ExpMoments, ReferenceModelHasPassingAndFailingDeltas) {
  const auto model = fixtures::reference_model();
  auto ec = small(512);
  ec.step = 1.0 / 128.0;
  const std::vector<double> deltas{0.05, 0.2, 5.0, 20.0};
  const auto probe = exp_moment_probe(model, Segment::constant(model.shape(ec.step), 0.0), deltas, 4, ec);
  ASSERT_TRUE(probe.largest_passing);
  EXPECT_GT(*probe.largest_passing, 0.0);
  EXPECT_FALSE(probe.passed.back());
}
