#include <gtest/gtest.h>

#include <cmath>

#include "ergokit/combinatorics.hpp"

using namespace ergokit;

namespace {

double binary_entropy(double p) { return -p * std::log(p) - (1 - p) * std::log(1 - p); }

// brute-force count of binary/ternary words within rho_n < r of a fixed word
std::uint64_t enumerate_ball(int n, int a, double r) {
  std::vector<std::uint8_t> w(std::size_t(n), 0), v(std::size_t(n), 0);
  std::uint64_t total = 1, count = 0;
  for (int i = 0; i < n; ++i) total *= std::uint64_t(a);
  for (std::uint64_t c = 0; c < total; ++c) {
    auto t = c;
    for (int i = 0; i < n; ++i, t /= std::uint64_t(a)) v[std::size_t(i)] = std::uint8_t(t % std::uint64_t(a));
    if (hamming_pseudometric(v, w) < r) ++count;
  }
  return count;
}

}  // namespace

TEST(Hamming, Examples) {
  std::vector<std::uint8_t> a{0, 1, 1, 0}, b{0, 1, 0, 0}, c{1, 0, 0, 1};
  EXPECT_EQ(hamming_pseudometric(a, a), 0.0);
  EXPECT_EQ(hamming_pseudometric(a, b), 0.25);
  EXPECT_EQ(hamming_pseudometric(a, c), 1.0);
  std::vector<std::uint8_t> shortWord{0, 1};
  EXPECT_THROW(hamming_pseudometric(a, shortWord), Error);
}

TEST(Hamming, SymmetricAndTriangleExhaustive) {
  for (int n = 1; n <= 8; ++n) {
    const int N = 1 << n;
    auto word = [&](int c) {
      std::vector<std::uint8_t> w(static_cast<std::size_t>(n));
      for (int i = 0; i < n; ++i) w[std::size_t(i)] = std::uint8_t((c >> i) & 1);
      return w;
    };
    // the metric depends on u xor v only, so fix u = 0 for the triangle check
    const auto u = word(0);
    for (int v = 0; v < N; ++v) {
      const auto wv = word(v);
      EXPECT_EQ(hamming_pseudometric(u, wv), hamming_pseudometric(wv, u));
      for (int w = 0; w < N; ++w) {
        const auto ww = word(w);
        EXPECT_LE(hamming_pseudometric(u, ww), hamming_pseudometric(u, wv) + hamming_pseudometric(wv, ww) + 1e-15);
      }
    }
  }
}

TEST(DeltaConstant, BinaryEntropyForTwoSymbols) {
  for (double eps : {0.01, 0.04, 0.1, 0.2})
    EXPECT_NEAR(delta_constant(eps, 2), binary_entropy(2 * std::sqrt(eps)), 1e-12);
  EXPECT_NEAR(delta_constant(0.01, 2), -0.2 * std::log(0.2) - 0.8 * std::log(0.8), 1e-15);
}

TEST(DeltaConstant, DecreasesToZero) {
  const double a = delta_constant(1e-2, 3), b = delta_constant(1e-4, 3), c = delta_constant(1e-6, 3);
  EXPECT_GT(a, b);
  EXPECT_GT(b, c);
  EXPECT_GT(c, 0.0);
  EXPECT_LT(c, 0.02);
}

TEST(DeltaConstant, OutOfRange) {
  for (double eps : {0.0, -0.1, 0.25, 0.5}) {
    try {
      delta_constant(eps, 2);
      FAIL();
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::EpsOutOfRange);
    }
  }
}

TEST(HammingBall, SmallExample) {
  // 2 n sqrt(eps) = 2 at n = 4: open ball keeps radii 0 and 1
  const auto r = hamming_ball_bound_check(4, 2, 1.0 / 16);
  EXPECT_EQ(r.m, 2);
  EXPECT_EQ(r.exactCount, Count(5));
}

TEST(HammingBall, CountMatchesEnumeration) {
  for (int a : {2, 3})
    for (int n = 1; n <= (a == 2 ? 12 : 8); ++n)
      for (double eps : {0.01, 0.04, 0.09}) {
        const auto r = hamming_ball_bound_check(n, a, eps);
        EXPECT_EQ(std::uint64_t(r.exactCount), enumerate_ball(n, a, 2 * std::sqrt(eps))) << n << " " << a << " " << eps;
      }
}

TEST(HammingBall, StirlingBoundOnRange) {
  const auto s = scan_hamming_bounds(12, 30, 2, 0.04);
  for (const auto& r : s.rows) EXPECT_TRUE(r.stirlingHolds) << r.n;
  ASSERT_TRUE(s.stirlingFrom.has_value());
  EXPECT_EQ(*s.stirlingFrom, 12);
  // n = 20: 2 n sqrt(eps) = 8 exactly, radii up to 7
  const auto r = hamming_ball_bound_check(20, 2, 0.04);
  Count expect = 0, c = 1;
  for (int i = 0; i <= 7; ++i) {
    expect += c;
    c = c * Count(20 - i) / Count(i + 1);
  }
  EXPECT_EQ(r.exactCount, expect);
  EXPECT_EQ(to_string(r.exactCount), "137980");
}

TEST(HammingBall, CrudeBoundFailsForSmallM) {
  // m = 1: sum_{i<=1} C(n,i) = 1 + n against 1 * C(n,1) = n
  const auto r = hamming_ball_bound_check(10, 2, 0.0025);
  EXPECT_EQ(r.m, 1);
  EXPECT_EQ(r.crudeLhs, Count(11));
  EXPECT_EQ(r.paperCrudeBound, 10.0);
  EXPECT_FALSE(r.crudeHolds);
}
