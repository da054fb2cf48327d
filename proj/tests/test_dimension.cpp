#include <gtest/gtest.h>

#include <cmath>

#include "ergokit/verify.hpp"

using namespace ergokit;

namespace {

const double kLog2 = std::log(2.0);
const double kLogLam = std::log((3.0 + std::sqrt(5.0)) / 2.0);

SystemDescriptor dyadic(int window = 64) { return {FullShift{2, DyadicMetric{}, window}}; }
MeasureOracle half() { return {bernoulli({0.5, 0.5})}; }
MeasureOracle lebesgue() { return {LebesgueTorus{}}; }

std::vector<double> dyadic_scales(int k0, int k1) {
  std::vector<double> s;
  for (int k = k0; k <= k1; ++k) s.push_back(std::ldexp(1.0, -k));
  return s;
}

std::vector<int> range(int a, int b) {
  std::vector<int> v;
  for (int i = a; i <= b; ++i) v.push_back(i);
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// unstable-set clouds

TEST(UnstableCloud, CatMapIsEigenSegment) {
  const auto sys = cat_map();
  const auto x = sample_point(sys, lebesgue(), 4);
  const auto c = sample_unstable_set(sys, x, 0.05, 24, 2001, 0);
  const auto v = unstable_direction(std::get<ToralAutomorphism>(sys.v)).vector;
  ASSERT_GT(c.points.size(), 1000u);
  EXPECT_LT(c.points.size(), std::size_t(c.candidates));  // the sweep overshoots delta and gets trimmed
  for (const auto& p : c.points) {
    const auto d = torus_delta(p.torus(), x.torus());
    EXPECT_LT(std::fabs(d[0] * v[1] - d[1] * v[0]), 1e-9);
    EXPECT_LE(std::hypot(d[0], d[1]), 0.05);
  }
}

TEST(UnstableCloud, AdmissionInvariantRechecked) {
  const auto sys = cat_map();
  const auto x = sample_point(sys, lebesgue(), 8);
  const auto c = sample_unstable_set(sys, x, 0.1, 24, 301, 0);
  for (const auto& p : c.points) {
    for (int n = 0; n <= c.backHorizon; ++n)
      EXPECT_LE(distance(sys, iterate(sys, x, -n), iterate(sys, p, -n)), c.delta);
    EXPECT_LE(distance(sys, iterate(sys, x, -c.backHorizon), iterate(sys, p, -c.backHorizon)),
              c.admissionTolerance);
  }
}

TEST(UnstableCloud, DyadicKeepsPastAndAdmitsAll) {
  const auto sys = dyadic(64);
  const auto x = sample_point(sys, half(), 2);
  const auto c = sample_unstable_set(sys, x, 0.5, 40, 1024, 3);
  EXPECT_EQ(c.enumerationDepth, 10);
  EXPECT_EQ(c.points.size(), 1024u);
  EXPECT_EQ(c.candidates, 1024);
  for (const auto& p : c.points)
    for (std::int64_t i = -64; i <= 0; ++i) EXPECT_EQ(p.symbolic().at(i), x.symbolic().at(i));
}

TEST(UnstableCloud, ReversedShiftKeepsFuture) {
  auto sys = inverse(dyadic(32));
  const auto x = sample_point(sys, half(), 2);
  const auto c = sample_unstable_set(sys, x, 0.5, 20, 64, 3);
  EXPECT_EQ(c.points.size(), 64u);
  for (const auto& p : c.points)
    for (std::int64_t i = 0; i <= 32; ++i) EXPECT_EQ(p.symbolic().at(i), x.symbolic().at(i));
}

TEST(UnstableCloud, EmptyCloud) {
  const auto x = sample_point(cat_map(), lebesgue(), 1);
  try {
    sample_unstable_set(cat_map(), x, 1e-31, 24, 10, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyCloud);
  }
  const auto y = sample_point(dyadic(), half(), 1);
  try {
    sample_unstable_set(dyadic(), y, 1e-3, 10, 64, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::EmptyCloud);
  }
}

TEST(UnstableCloud, NonHyperbolicRejected) {
  const SystemDescriptor t{ToralTranslation{0.1, 0.2}};
  EXPECT_THROW(sample_unstable_set(t, sample_point(t, lebesgue(), 1), 0.1, 4, 10, 0), Error);
}

// ---------------------------------------------------------------------------
// box counting

TEST(BoxCount, SegmentHasDimensionOne) {
  const auto sys = cat_map();
  const auto c = sample_unstable_set(sys, sample_point(sys, lebesgue(), 5), 0.25, 24, 12500, 0);
  ASSERT_GE(c.points.size(), 10000u);
  const auto e = box_counting_dimension(sys, c, dyadic_scales(4, 9));
  EXPECT_GE(e.slope, 0.95);
  EXPECT_LE(e.slope, 1.05);
  EXPECT_GT(e.slopeLo, 0.0);
  for (std::size_t i = 1; i < e.values.size(); ++i) EXPECT_GE(e.values[i], e.values[i - 1]);
  ASSERT_EQ(e.shiftedCounts.size(), e.values.size());
}

TEST(BoxCount, RepeatedPointHasDimensionZero) {
  PointCloud c;
  c.points.assign(100, sample_point(cat_map(), lebesgue(), 3));
  const auto e = box_counting_dimension(cat_map(), c, dyadic_scales(2, 6));
  EXPECT_EQ(e.slope, 0.0);
}

TEST(BoxCount, DyadicFutureCloudExact) {
  const auto sys = dyadic(64);
  const auto c = sample_unstable_set(sys, sample_point(sys, half(), 7), 0.5, 40, 4096, 1);
  const auto e = box_counting_dimension(sys, c, dyadic_scales(1, 12));
  for (int k = 1; k <= 12; ++k) EXPECT_EQ(e.values[std::size_t(k - 1)], std::ldexp(1.0, k));
  EXPECT_NEAR(e.slope, 1.0, 1e-6);
}

TEST(BoxCount, Preconditions) {
  const auto sys = dyadic(64);
  const auto c = sample_unstable_set(sys, sample_point(sys, half(), 7), 0.5, 40, 256, 1);
  try {
    box_counting_dimension(sys, c, dyadic_scales(1, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewScales);
  }
  try {
    box_counting_dimension(sys, c, dyadic_scales(60, 70));  // below the window resolution
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewScales);
  }
  PointCloud small;
  small.points.assign(99, c.points[0]);
  try {
    box_counting_dimension(sys, small, dyadic_scales(1, 5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::TooFewPoints);
  }
}

// ---------------------------------------------------------------------------
// local dimension

TEST(LocalDimension, ConditionedBernoulliExact) {
  const auto sys = dyadic(64);
  const auto x = sample_point(sys, half(), 9);
  const auto mx = disintegrate_past(half(), 16, x);
  PointCloud none;
  const auto e = local_dimension_lower(sys, none, &mx, x, dyadic_scales(1, 20));
  for (int k = 1; k <= 20; ++k) EXPECT_NEAR(e.values[std::size_t(k - 1)], std::ldexp(1.0, -(k - 1)), 1e-15);
  EXPECT_NEAR(e.slope, 1.0, 1e-12);
  EXPECT_LE(e.liminfProxy, 1.0);
}

TEST(LocalDimension, PointMassIsZero) {
  const MeasureOracle o{bernoulli({1.0, 0.0})};
  const auto sys = dyadic(32);
  const auto x = sample_point(sys, o, 1);
  const auto mx = disintegrate_past(o, 8, x);
  const auto e = local_dimension_lower(sys, PointCloud{}, &mx, x, dyadic_scales(1, 10));
  EXPECT_EQ(e.slope, 0.0);
}

TEST(LocalDimension, MarkovMatchesEntropyOverLog2) {
  const MeasureOracle o{markov({{0.9, 0.1}, {0.5, 0.5}})};
  const auto sys = dyadic(256);
  double sum = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto x = sample_point(sys, o, s);
    const auto mx = disintegrate_past(o, 16, x);
    sum += local_dimension_lower(sys, PointCloud{}, &mx, x, dyadic_scales(1, 200)).slope;
  }
  EXPECT_NEAR(sum / 20, entropy_rate(o) / kLog2, 0.05);
}

TEST(LocalDimension, CatMapEmpirical) {
  const auto sys = cat_map();
  const auto x = sample_point(sys, lebesgue(), 5);
  const auto c = sample_unstable_set(sys, x, 0.25, 24, 12500, 0);
  const auto e = local_dimension_lower(sys, c, nullptr, x, {0.1, 0.05, 0.025, 0.0125, 0.00625});
  EXPECT_GE(e.slope, 0.9);
  EXPECT_LE(e.slope, 1.1);
}

TEST(LocalDimension, MassStarvation) {
  const auto sys = cat_map();
  const auto c = sample_unstable_set(sys, sample_point(sys, lebesgue(), 5), 0.05, 24, 200, 0);
  const auto far = Point{TorusPoint::from(0.5, 0.5)};
  try {
    local_dimension_lower(sys, c, nullptr, far, {1e-2, 5e-3, 2.5e-3, 1.25e-3});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MassStarvation);
  }
}

// ---------------------------------------------------------------------------
// main inequality

TEST(Verify, CatMapBothDirections) {
  VerifyConfig cfg;
  cfg.delta = 0.25;
  cfg.backHorizon = 24;
  cfg.budget = 2000;
  cfg.scales = dyadic_scales(4, 8);
  cfg.chi.nSchedule = range(1, 24);
  cfg.chi.samplePoints = 200;
  for (auto dir : {Direction::Forward, Direction::Backward}) {
    const auto r = verify_main_inequality(cat_map(), lebesgue(), dir, cfg);
    EXPECT_EQ(r.failedPoints, 0);
    EXPECT_NEAR(r.hValue, kLogLam, 1e-12);
    EXPECT_NEAR(r.ratio, 1.0, 0.05);
    EXPECT_NEAR(r.dimEstimate, 1.0, 0.05);
    EXPECT_TRUE(r.inequalityHolds);
    EXPECT_FALSE(r.divergenceRegime);
  }
}

TEST(Verify, DyadicBernoulli) {
  VerifyConfig cfg;
  cfg.delta = 0.5;
  cfg.budget = 1024;
  cfg.scales = dyadic_scales(1, 10);
  cfg.localScales = dyadic_scales(1, 30);
  cfg.chi.rSchedule = {0.5, 0.25, 0.125};
  cfg.chi.nSchedule = range(1, 32);
  cfg.chi.samplePoints = 100;
  const auto r = verify_main_inequality(dyadic(256), half(), Direction::Forward, cfg);
  EXPECT_EQ(r.failedPoints, 0);
  EXPECT_NEAR(r.dimEstimate, 1.0, 1e-6);
  EXPECT_NEAR(r.ratio, 1.0, 0.05);
  ASSERT_TRUE(r.localDimEstimate.has_value());
  EXPECT_NEAR(*r.localDimEstimate, 1.0, 1e-9);
  EXPECT_TRUE(r.inequalityHolds);
}

TEST(Verify, SerialEqualsParallel) {
  VerifyConfig cfg;
  cfg.basePoints = 6;
  cfg.delta = 0.25;
  cfg.backHorizon = 24;
  cfg.budget = 400;
  cfg.scales = dyadic_scales(3, 6);
  cfg.chi.nSchedule = range(1, 8);
  cfg.chi.samplePoints = 20;
  const auto a = verify_main_inequality(cat_map(), lebesgue(), Direction::Forward, cfg);
  cfg.threads = 3;
  const auto b = verify_main_inequality(cat_map(), lebesgue(), Direction::Forward, cfg);
  EXPECT_EQ(a.chiEstimate, b.chiEstimate);
  EXPECT_EQ(a.dimEstimate, b.dimEstimate);
  for (std::size_t i = 0; i < a.perPoint.size(); ++i) EXPECT_EQ(a.perPoint[i].counts, b.perPoint[i].counts);
}
