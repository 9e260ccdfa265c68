#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "segflow/core/assumptions.hpp"
#include "segflow/core/errors.hpp"
#include "segflow/metric/assignment.hpp"
#include "segflow/metric/metric.hpp"

using namespace segflow;

namespace {

const SegmentShape kShape = SegmentShape::make(1, 0.5, 1.0 / 16.0);

double brute_force(const EmpiricalMeasure& a, const EmpiricalMeasure& b, const MetricParams& mp) {
  std::vector<std::size_t> perm(a.size());
  std::iota(perm.begin(), perm.end(), 0);
  double best = INFINITY;
  do {
    double s = 0.0;
    for (std::size_t i = 0; i < perm.size(); ++i) s += rho(a[i], b[perm[i]], mp);
    best = std::min(best, s);
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best / static_cast<double>(a.size());
}

EmpiricalMeasure random_measure(std::size_t n, const RngStream& rng) {
  const auto draw = random_segments(kShape, rng, 2.0);
  std::vector<Segment> atoms;
  for (std::size_t i = 0; i < n; ++i) atoms.push_back(draw(i));
  return EmpiricalMeasure(std::move(atoms));
}

} // namespace

TEST(Rho, IdentityAndUnitExample) {
  const auto x = Segment::constant(kShape, 0.0);
  const auto y = Segment::constant(kShape, 1.0);
  const MetricParams mp{2.0, 1.0};
  EXPECT_EQ(rho(x, x, mp), 0.0);
  EXPECT_NEAR(rho(x, y, mp), std::sqrt(2.0), 1e-15);
}

TEST(Rho, SymmetricOnRandomPairs) {
  const auto pairs = random_pairs(kShape, RngStream(4, 0), 3.0);
  for (const MetricParams mp : {MetricParams{2.0, 1.0}, MetricParams{1.0, 0.5}, MetricParams{3.5, 0.25}}) {
    for (std::size_t i = 0; i < 200; ++i) {
      const auto [a, b] = pairs(i);
      EXPECT_EQ(rho(a, b, mp), rho(b, a, mp));
      EXPECT_GT(rho(a, b, mp), 0.0);
    }
  }
}

TEST(MetricParams, Validation) {
  EXPECT_THROW((MetricParams{0.5, 1.0}.validate()), RangeError);
  EXPECT_THROW((MetricParams{2.0, 0.0}.validate()), RangeError);
  EXPECT_THROW((MetricParams{2.0, 1.5}.validate()), RangeError);
  EXPECT_NO_THROW((MetricParams{1.0, 1.0}.validate()));
}

TEST(LipNorm, Examples) {
  const MetricParams mp{2.0, 1.0};
  const auto sampler = random_segments(kShape, RngStream(5, 0), 3.0);
  EXPECT_EQ(lip_norm_lower_bound(constant_observable(0.0), sampler, 50, mp), 0.0);
  EXPECT_LE(lip_norm_lower_bound(constant_observable(1.0), sampler, 50, mp), 1.0);
  const auto f = eval0_observable();
  const double small = lip_norm_lower_bound(f, sampler, 20, mp);
  const double large = lip_norm_lower_bound(f, sampler, 80, mp);
  EXPECT_LE(small, large);
  EXPECT_LE(large, *f.norm_bound(mp));
}

TEST(Wasserstein, IdentityAndSingleton) {
  const MetricParams mp{2.0, 1.0};
  const auto a = random_measure(20, RngStream(6, 0));
  EXPECT_EQ(wasserstein(a, a, mp), 0.0);
  const auto x = random_measure(1, RngStream(6, 1));
  const auto y = random_measure(1, RngStream(6, 2));
  EXPECT_EQ(wasserstein(x, y, mp), rho(x[0], y[0], mp));
}

TEST(Wasserstein, MatchesExhaustiveSearch) {
  const MetricParams mp{2.0, 1.0};
  for (std::size_t n = 2; n <= 7; ++n) {
    for (std::uint64_t rep = 0; rep < 10; ++rep) {
      const auto a = random_measure(n, RngStream(100 + n, 2 * rep));
      const auto b = random_measure(n, RngStream(100 + n, 2 * rep + 1));
      EXPECT_NEAR(wasserstein(a, b, mp), brute_force(a, b, mp), 1e-12) << "n=" << n;
    }
  }
}

TEST(Wasserstein, Errors) {
  const MetricParams mp{2.0, 1.0};
  const auto a = random_measure(4, RngStream(7, 0));
  const auto b = random_measure(5, RngStream(7, 1));
  EXPECT_THROW(wasserstein(a, b, mp), ShapeError);
  EXPECT_THROW(wasserstein(a, a, mp, WassersteinOptions{3}), CapacityError);
}

TEST(Assignment, SmallMatrix) {
  const std::vector<double> cost{4, 1, 3, 2, 0, 5, 3, 2, 2};
  const auto col = solve_assignment(cost, 3);
  double total = 0.0;
  for (std::size_t i = 0; i < 3; ++i) total += cost[i * 3 + col[i]];
  EXPECT_EQ(total, 5.0);
}
