#include <gtest/gtest.h>

#include <cmath>

#include "ergokit/geometry.hpp"
#include "ergokit/measures.hpp"

using namespace ergokit;

namespace {

SystemDescriptor dyadic(int window) { return {FullShift{2, DyadicMetric{}, window}}; }

// first |i| where the two stored symbol arrays differ, read through their shifts
int first_disagreement(const SymbolicPoint& a, const SymbolicPoint& b, int reach) {
  for (int k = 0; k <= reach; ++k)
    if (a.at(k) != b.at(k) || a.at(-k) != b.at(-k)) return k;
  return -1;
}

}  // namespace

TEST(BowenBall, TrivialCases) {
  auto sys = cat_map();
  Point x{TorusPoint::from(0.3, 0.4)};
  for (int n : {1, 5, 30}) EXPECT_TRUE(bowen_ball_contains(sys, x, x, n, 1e-9));
  Point y{torus_offset(x.torus(), 0.01, 0.0)};
  EXPECT_TRUE(bowen_ball_contains(sys, x, y, 1, 0.0101));
  EXPECT_FALSE(bowen_ball_contains(sys, x, y, 1, 0.0099));
}

TEST(BowenBall, DyadicBallIsCoordinateWindow) {
  // d(T^k x, T^k y) < 2^-m  <=>  agreement on [k-m, k+m]; over k < n that is [-m, n+m-1]
  const int N = 40;
  auto sys = dyadic(N);
  auto x = sample_point(sys, {bernoulli({0.5, 0.5})}, 17);
  Rng rng(3);
  for (int n = 1; n <= 12; ++n) {
    for (int m = 1; m <= 6; ++m) {
      const double r = std::ldexp(1.0, -m);
      for (int i = -20; i <= 25; ++i) {
        auto y = Point{x.symbolic().with(i, std::uint8_t(1 - x.symbolic().at(i)))};
        const bool inside = i < -m || i > n + m - 1;
        EXPECT_EQ(bowen_ball_contains(sys, x, y, n, r), inside) << n << " " << m << " " << i;
      }
      for (int t = 0; t < 20; ++t) {
        SymbolicPoint y = x.symbolic();
        bool inside = true;
        for (int f = 0; f < 3; ++f) {
          const int i = int(rng.between(-25, 25));
          y = y.with(i, std::uint8_t(1 - y.at(i)));
        }
        for (int i = -m; i <= n + m - 1; ++i) inside = inside && y.at(i) == x.symbolic().at(i);
        EXPECT_EQ(bowen_ball_contains(sys, x, {y}, n, r), inside);
      }
    }
  }
}

TEST(BowenBall, Nesting) {
  auto sys = cat_map();
  Rng rng(5);
  for (int t = 0; t < 500; ++t) {
    auto x = sample_point(sys, {LebesgueTorus{}}, rng.next());
    auto y = sample_probe(sys, x, 0.01, 1e-9, rng);
    for (int n = 1; n < 20; ++n)
      if (bowen_ball_contains(sys, x, y, n + 1, 0.05)) EXPECT_TRUE(bowen_ball_contains(sys, x, y, n, 0.05));
  }
}

TEST(BowenBall, WindowExhausted) {
  auto sys = dyadic(8);
  auto x = sample_point(sys, {bernoulli({0.5, 0.5})}, 1);
  // needs agreement up to index n+m-1 = 10 > window
  EXPECT_THROW(bowen_ball_contains(sys, x, x, 7, 1.0 / 16), Error);
}

TEST(Lipschitz, CatMapMatchesOperatorNorm) {
  auto sys = cat_map();
  ToralAutomorphism a;
  for (int n = 1; n <= 8; ++n) {
    auto x = sample_point(sys, {LebesgueTorus{}}, 100 + n);
    auto e = estimate_pointwise_lipschitz(sys, x, n, 0.1, 10000, 7);
    const double truth = operator_norm(a, n);
    EXPECT_LE(e.value, truth * (1 + 1e-9));
    EXPECT_NEAR(e.value / truth, 1.0, 0.02) << n;
  }
}

TEST(Lipschitz, TranslationIsIsometry) {
  SystemDescriptor sys{ToralTranslation{0.3819660112501051, 0.1234}};
  auto x = sample_point(sys, {LebesgueTorus{}}, 4);
  for (int n : {1, 10, 50}) EXPECT_NEAR(estimate_pointwise_lipschitz(sys, x, n, 0.1, 2000, 9).value, 1.0, 1e-9);
}

TEST(Lipschitz, DyadicShiftDoubles) {
  auto sys = dyadic(64);
  auto x = sample_point(sys, {bernoulli({0.5, 0.5})}, 8);
  auto e = estimate_pointwise_lipschitz(sys, x, 1, 0.5, 10000, 3);
  EXPECT_GE(e.value, 1.9);
  EXPECT_LE(e.value, 2.0);
  // exhaustive oracle: every y differing from x only on [-6, 5], first-disagreement arithmetic
  const auto& xs = x.symbolic();
  double oracle = 0.0;
  for (std::uint32_t mask = 1; mask < (1u << 12); ++mask) {
    SymbolicPoint y = xs;
    for (int b = 0; b < 12; ++b)
      if (mask >> b & 1u) y = y.with(b - 6, std::uint8_t(1 - y.at(b - 6)));
    const int k0 = first_disagreement(xs, y, 20);
    if (std::ldexp(1.0, -k0) >= 0.5) continue;  // outside B(x, 1/2)
    SymbolicPoint tx = xs, ty = y;
    tx.shift += 1;
    ty.shift += 1;
    const int k1 = first_disagreement(tx, ty, 20);
    oracle = std::max(oracle, std::ldexp(1.0, k0 - k1));
  }
  EXPECT_EQ(oracle, 2.0);
}

TEST(Lipschitz, MonotoneInProbes) {
  auto sys = cat_map();
  auto x = sample_point(sys, {LebesgueTorus{}}, 2);
  auto e = estimate_pointwise_lipschitz(sys, x, 6, 0.1, 3000, 5);
  for (std::size_t i = 1; i < e.curve.size(); ++i) {
    EXPECT_GE(e.curve[i].second, e.curve[i - 1].second);
    EXPECT_GT(e.curve[i].first, e.curve[i - 1].first);
  }
  EXPECT_EQ(e.curve.back().second, e.value);
  EXPECT_EQ(estimate_pointwise_lipschitz(sys, x, 6, 0.1, 3000, 5).value, e.value);
}

TEST(Lipschitz, NoProbeAccepted) {
  auto sys = cat_map();
  auto x = sample_point(sys, {LebesgueTorus{}}, 2);
  try {
    estimate_pointwise_lipschitz(sys, x, 60, 0.05, 50, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NoProbeAccepted);
  }
}

TEST(Lipschitz, NonincreasingAsRadiusShrinks) {
  SystemDescriptor sys{ToralAutomorphism{{3, 2, 1, 1}}};
  std::vector<int> ns{1, 2, 4, 8};
  for (int t = 0; t < 20; ++t) {
    auto x = sample_point(sys, {LebesgueTorus{}}, derive_seed(9, t));
    const auto traces = trace_probes(sys, x, ns, 0.2, 400, derive_seed(10, t), 1e-13);
    std::vector<LipschitzAtN> prev;
    for (double r : {0.2, 0.1, 0.05, 0.01, 0.001}) {
      auto cur = lipschitz_from_probes(traces, ns, r);
      if (!prev.empty())
        for (std::size_t j = 0; j < ns.size(); ++j) EXPECT_LE(cur[j].value, prev[j].value);
      prev = cur;
    }
  }
  // the same restriction on the shift
  auto sh = dyadic(64);
  auto x = sample_point(sh, {bernoulli({0.5, 0.5})}, 1);
  const auto traces = trace_probes(sh, x, ns, 0.5, 500, 2, 1e-13);
  double last = 1e9;
  for (double r : {0.5, 0.25, 0.125}) {
    const double v = lipschitz_from_probes(traces, ns, r)[3].value;
    EXPECT_LE(v, last);
    last = v;
  }
}

TEST(Lipschitz, SubadditiveExactOnLinearMaps) {
  for (auto m : {std::array<std::int64_t, 4>{2, 1, 1, 1}, {3, 2, 1, 1}, {1, 1, 0, 1}, {5, 2, 2, 1}, {0, 1, -1, 3}}) {
    SystemDescriptor sys{ToralAutomorphism{m}};
    for (int a = 1; a <= 10; ++a)
      for (int b = 1; b <= 10; ++b) {
        const double lhs = std::max(0.0, std::log(*exact_lipschitz(sys, a + b)));
        const double rhs = std::max(0.0, std::log(*exact_lipschitz(sys, a))) +
                           std::max(0.0, std::log(*exact_lipschitz(sys, b)));
        EXPECT_LE(lhs, rhs + 1e-12);
      }
  }
}

TEST(Lipschitz, SubadditiveSampledSmoke) {
  // sampled sup is biased low on both sides, hence the slack
  SystemDescriptor sys{ToralAutomorphism{{3, 2, 1, 1}}};
  auto x = sample_point(sys, {LebesgueTorus{}}, 77);
  for (auto [m, n] : {std::pair{2, 3}, {3, 3}, {1, 5}}) {
    const auto lmn = estimate_pointwise_lipschitz(sys, x, m + n, 0.1, 4000, 1).value;
    const auto lm = estimate_pointwise_lipschitz(sys, x, m, 0.1, 4000, 2).value;
    const auto ln = estimate_pointwise_lipschitz(sys, iterate(sys, x, m), n, 0.1, 4000, 3).value;
    EXPECT_LE(std::log(lmn), std::log(lm) + std::log(ln) + 0.05);
  }
}

TEST(BallInclusion, CatMapFastScaleHolds) {
  auto sys = cat_map();
  auto x = sample_point(sys, {LebesgueTorus{}}, 21);
  auto rep = check_ball_inclusion(sys, x, 1.1, 0.1, 0.5, 40, 100, 4);
  ASSERT_TRUE(rep.holdsFromN.has_value());
  for (int n = *rep.holdsFromN; n <= 40; ++n) EXPECT_EQ(rep.violationsPerN[std::size_t(n - 1)], 0);
}

TEST(BallInclusion, IsometryHoldsFromOne) {
  SystemDescriptor sys{ToralTranslation{0.25, 0.5}};
  auto x = sample_point(sys, {LebesgueTorus{}}, 21);
  auto rep = check_ball_inclusion(sys, x, 0.3, 0.1, 0.05, 40, 50, 4);
  ASSERT_TRUE(rep.holdsFromN.has_value());
  EXPECT_EQ(*rep.holdsFromN, 1);
  EXPECT_FALSE(rep.firstFailure.has_value());
}

TEST(BallInclusion, SlowScaleFails) {
  auto sys = cat_map();
  auto x = sample_point(sys, {LebesgueTorus{}}, 21);
  auto rep = check_ball_inclusion(sys, x, 0.5, 0.1, 0.5, 40, 100, 4);
  ASSERT_TRUE(rep.firstFailure.has_value());
  const auto& f = *rep.firstFailure;
  EXPECT_FALSE(bowen_ball_contains(sys, x, f.witness, f.n, 0.1));
  EXPECT_LE(f.radius, 0.5 * std::exp(-0.5 * f.n));
  // the escaping displacement has a component along the unstable eigenvector
  auto u = unstable_direction(ToralAutomorphism{});
  auto d = torus_delta(f.witness.torus(), x.torus());
  EXPECT_GT(std::fabs(d[0] * u.vector[0] + d[1] * u.vector[1]), 0.0);
}

TEST(BallInclusion, ScaleUnderflow) {
  auto sys = dyadic(16);
  auto x = sample_point(sys, {bernoulli({0.5, 0.5})}, 1);
  try {
    check_ball_inclusion(sys, x, 1.0, 0.25, 0.5, 40, 5, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ScaleUnderflow);
  }
}
