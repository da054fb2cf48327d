#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ergokit/linear.hpp"
#include "ergokit/measures.hpp"
#include "ergokit/systems.hpp"

using namespace ergokit;

namespace {

Point torus(double x, double y) { return {TorusPoint::from(x, y)}; }

SystemDescriptor dyadic_shift(int window = 256) { return {FullShift{2, DyadicMetric{}, window}}; }
SystemDescriptor hilbert_shift(int window = 256) { return {FullShift{2, WeightedL2Metric{}, window}}; }

Point word_point(int window, const std::vector<std::pair<int, int>>& ones) {
  std::vector<std::uint8_t> s(std::size_t(2 * window + 1), 0);
  for (auto [i, v] : ones) s[std::size_t(i + window)] = std::uint8_t(v);
  return {SymbolicPoint::from(std::move(s))};
}

}  // namespace

TEST(Iterate, CatMapFixedPoint) {
  auto p = iterate(cat_map(), torus(0, 0), 5).torus();
  EXPECT_EQ(p.x(), 0.0);
  EXPECT_EQ(p.y(), 0.0);
}

TEST(Iterate, CatMapOneStep) {
  auto p = iterate(cat_map(), torus(0.25, 0.5), 1).torus();
  EXPECT_EQ(p.x(), 0.0);
  EXPECT_EQ(p.y(), 0.75);
}

TEST(Iterate, ShiftMovesSymbolsLeft) {
  auto sys = dyadic_shift(8);
  auto x = word_point(8, {{3, 1}, {-2, 1}});
  auto y = iterate(sys, x, 1).symbolic();
  for (int i = -7; i <= 7; ++i) EXPECT_EQ(y.at(i), x.symbolic().at(i + 1)) << i;
}

TEST(Iterate, RoundTripIsExact) {
  auto sys = cat_map();
  Rng rng(7);
  for (int t = 0; t < 200; ++t) {
    auto x = sample_point(sys, {LebesgueTorus{}}, rng.next());
    auto back = iterate(sys, iterate(sys, x, 37), -37).torus();
    EXPECT_EQ(back.X, x.torus().X);
    EXPECT_EQ(back.Y, x.torus().Y);
  }
  auto s = dyadic_shift(16);
  auto x = sample_point(s, {bernoulli({0.5, 0.5})}, 3);
  auto back = iterate(s, iterate(s, x, 12), -12).symbolic();
  for (int i = -16; i <= 16; ++i) EXPECT_EQ(back.at(i), x.symbolic().at(i));
}

TEST(Iterate, WindowExhausted) {
  auto s = dyadic_shift(4);
  auto x = word_point(4, {});
  EXPECT_NO_THROW(iterate(s, x, 4));
  try {
    iterate(s, x, 5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::WindowExhausted);
  }
}

TEST(Iterate, NonInvertibleRejected) {
  SystemDescriptor bad{ToralAutomorphism{{2, 0, 0, 1}}};
  try {
    iterate(bad, torus(0.1, 0.1), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NonInvertible);
  }
}

TEST(Iterate, InverseSystemUndoes) {
  auto sys = product(cat_map(), dyadic_shift(32));
  auto inv = inverse(sys);
  auto x = sample_point(sys, product_measure({LebesgueTorus{}}, {bernoulli({0.3, 0.7})}), 11);
  auto y = iterate(inv, iterate(sys, x, 9), 9);
  EXPECT_EQ(distance(sys, x, y), 0.0);
}

TEST(Distance, Examples) {
  auto s = dyadic_shift(10);
  auto x = word_point(10, {});
  EXPECT_EQ(distance(s, x, x), 0.0);
  auto y = word_point(10, {{3, 1}, {-3, 1}, {7, 1}});
  EXPECT_EQ(distance(s, x, y), 0.125);
  auto h = hilbert_shift(10);
  auto z = word_point(10, {{0, 1}});
  EXPECT_NEAR(distance(h, x, z), 1.0, 1e-15);
}

TEST(Distance, TorusWrapsAround) {
  EXPECT_NEAR(distance(cat_map(), torus(0.99, 0.5), torus(0.01, 0.5)), 0.02, 1e-12);
  EXPECT_NEAR(distance(cat_map(), torus(0.99, 0.99), torus(0.01, 0.01)), 0.02 * std::sqrt(2.0), 1e-12);
}

TEST(Distance, MixedSystems) {
  try {
    distance(cat_map(), torus(0, 0), word_point(3, {}));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::MixedSystems);
  }
}

TEST(Distance, TinyOffsetsKeepPrecision) {
  auto x = torus(0.3, 0.7);
  Point y{torus_offset(x.torus(), 3e-20, -4e-20)};
  EXPECT_NEAR(distance(cat_map(), x, y), 5e-20, 1e-33);
  auto fx = iterate(cat_map(), x, 10), fy = iterate(cat_map(), y, 10);
  auto d = torus_delta(fy.torus(), fx.torus());
  // A^10 applied to the offset exactly
  EXPECT_NEAR(d[0], 10946 * 3e-20 + 6765 * -4e-20, 1e-30);
}

TEST(Distance, TailBoundBelowNineHundredths) {
  EXPECT_LT(tail_bound(std::get<FullShift>(hilbert_shift().v)), 0.09);
}

TEST(Sampling, BernoulliFrequency) {
  auto s = dyadic_shift(1);
  MeasureOracle o{bernoulli({0.5, 0.5})};
  long zeros = 0;
  const int n = 1000000;
  for (int k = 0; k < n; ++k) zeros += sample_point(s, o, derive_seed(99, k)).symbolic().at(0) == 0;
  EXPECT_NEAR(double(zeros) / n, 0.5, 0.005);
}

TEST(Sampling, LebesgueKolmogorovSmirnov) {
  const int n = 100000;
  std::vector<double> xs(n), ys(n);
  for (int k = 0; k < n; ++k) {
    auto p = sample_point(cat_map(), {LebesgueTorus{}}, derive_seed(5, k)).torus();
    xs[k] = p.x();
    ys[k] = p.y();
  }
  for (auto* v : {&xs, &ys}) {
    std::sort(v->begin(), v->end());
    double D = 0.0;
    for (int k = 0; k < n; ++k) D = std::max({D, (k + 1.0) / n - (*v)[k], (*v)[k] - double(k) / n});
    EXPECT_LT(D, 1.63 / std::sqrt(double(n)));  // 1% critical value
  }
}

TEST(Sampling, DegenerateMarkovIsConstant) {
  auto s = dyadic_shift(20);
  MeasureOracle o{markov({{1, 0}, {0, 1}}, std::vector<double>{1, 0})};
  auto x = sample_point(s, o, 123).symbolic();
  for (int i = -20; i <= 20; ++i) EXPECT_EQ(x.at(i), 0);
}

TEST(Sampling, DeterministicPerSeed) {
  auto s = dyadic_shift(30);
  MeasureOracle o{markov({{0.9, 0.1}, {0.5, 0.5}})};
  EXPECT_EQ(*sample_point(s, o, 4).symbolic().data, *sample_point(s, o, 4).symbolic().data);
}

TEST(Sampling, IncompatibleOracle) {
  try {
    sample_point(cat_map(), {bernoulli({0.5, 0.5})}, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::IncompatibleOracle);
  }
}

TEST(Cylinder, Examples) {
  MeasureOracle half{bernoulli({0.5, 0.5})};
  std::vector<std::uint8_t> w7(7, 1);
  EXPECT_DOUBLE_EQ(cylinder_measure(half, w7, -3), std::ldexp(1.0, -7));
  MeasureOracle b{bernoulli({0.3, 0.7})};
  std::vector<std::uint8_t> w{0, 1, 1};
  EXPECT_NEAR(cylinder_measure(b, w, 0), 0.147, 1e-15);
  auto mk = markov({{0.9, 0.1}, {0.5, 0.5}});
  std::vector<std::uint8_t> ab{0, 1};
  EXPECT_NEAR(cylinder_measure({mk}, ab, 4), mk.pi[0] * 0.1, 1e-15);
  try {
    cylinder_measure({LebesgueTorus{}}, ab, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnsupportedOracle);
  }
}

TEST(Cylinder, SumsToOneAllLengths) {
  MeasureOracle mk{markov({{0.9, 0.1}, {0.5, 0.5}})};
  MeasureOracle b{bernoulli({0.3, 0.7})};
  for (const auto* o : {&mk, &b}) {
    for (int L = 1; L <= 20; ++L) {
      long double s = 0.0;  // 2^20 terms: accumulate wide so the check measures the oracle
      std::vector<std::uint8_t> w(static_cast<std::size_t>(L));
      for (std::uint32_t m = 0; m < (1u << L); ++m) {
        for (int i = 0; i < L; ++i) w[std::size_t(i)] = std::uint8_t((m >> i) & 1u);
        s += cylinder_measure(*o, w, 0);
      }
      EXPECT_NEAR(double(s), 1.0, 1e-12) << L;
    }
  }
}

TEST(Cylinder, AdditiveOverRefinement) {
  MeasureOracle mk{markov({{0.2, 0.5, 0.3}, {0.4, 0.4, 0.2}, {0.1, 0.1, 0.8}})};
  std::vector<std::uint8_t> w{2, 0, 1};
  const double whole = cylinder_measure(mk, w, 0);
  double parts = 0.0;
  for (std::uint8_t s = 0; s < 3; ++s) {
    auto v = w;
    v.push_back(s);
    parts += cylinder_measure(mk, v, 0);
  }
  EXPECT_NEAR(whole, parts, 1e-15);
}

TEST(Cylinder, GappedCoordinatesMatchMarginalisation) {
  MeasureOracle mk{markov({{0.9, 0.1}, {0.5, 0.5}})};
  std::vector<std::int64_t> c{0, 3};
  std::vector<std::uint8_t> s{1, 0};
  double brute = 0.0;
  for (int m = 0; m < 4; ++m) {
    std::vector<std::uint8_t> w{1, std::uint8_t(m & 1), std::uint8_t(m >> 1), 0};
    brute += cylinder_measure(mk, w, 0);
  }
  EXPECT_NEAR(std::exp(coords_log_measure(mk, c, s)), brute, 1e-15);
}

TEST(Markov, StationaryVector) {
  auto mk = markov({{0.9, 0.1}, {0.5, 0.5}});
  EXPECT_NEAR(mk.pi[0], 5.0 / 6.0, 1e-14);
  for (auto P : {std::vector<std::vector<double>>{{0.2, 0.5, 0.3}, {0.4, 0.4, 0.2}, {0.1, 0.1, 0.8}},
                 std::vector<std::vector<double>>{{0, 1}, {1, 0}}}) {
    auto m = markov(P);
    for (std::size_t j = 0; j < m.pi.size(); ++j) {
      double s = 0;
      for (std::size_t i = 0; i < m.pi.size(); ++i) s += m.pi[i] * m.P[i][j];
      EXPECT_NEAR(s, m.pi[j], 1e-12);
    }
  }
  EXPECT_THROW(markov({{1, 0}, {0, 1}}), Error);
  EXPECT_THROW(markov({{0.9, 0.1}, {0.5, 0.5}}, std::vector<double>{0.5, 0.5}), Error);
}

TEST(Weights, NormExamples) {
  WeightSequence w;
  EXPECT_EQ(weighted_norm(w, {0, 0, 0}, -1), 0.0);
  EXPECT_NEAR(weighted_norm(w, {0, 0, 1}, 0), std::sqrt(0.2), 1e-15);
  std::vector<double> c{0.3, -1.2, 2.0, 0.5};
  std::vector<double> c3 = c;
  for (auto& v : c3) v *= -3.0;
  EXPECT_NEAR(weighted_norm(w, c3, -2), 3.0 * weighted_norm(w, c, -2), 1e-14);
}

TEST(Weights, WitnessAndDecay) {
  WeightSequence w;
  EXPECT_LE(w.witness_ratio(300), 1.0);
  EXPECT_LE(w.subexp_rate(256), 0.05);
  for (int k = 0; k < 500; ++k) EXPECT_GT(w.a(k), w.a(k + 1));
}

TEST(Weights, OperatorNormPowers) {
  WeightSequence w;
  EXPECT_DOUBLE_EQ(operator_norm_power(w, 0, 256).value, 1.0);
  // ratio grid (n^2+1)/((n-1)^2+1) peaks at n = 2 with 5/2
  auto k1 = operator_norm_power(w, 1, 256);
  double grid = 0.0;
  for (int n = -256; n <= 256; ++n) grid = std::max(grid, (n * n + 1.0) / ((n - 1.0) * (n - 1.0) + 1.0));
  EXPECT_NEAR(k1.value, std::sqrt(grid), 1e-14);
  EXPECT_NEAR(k1.value, std::sqrt(2.5), 1e-14);
  EXPECT_EQ(k1.argmax, 2);
  EXPECT_TRUE(k1.stabilized);
  EXPECT_LT(std::log(operator_norm_power(w, 100, 256).value) / 100.0, 0.05);
  double prev = 1e9;
  for (int k = 1; k <= 200; ++k) {
    const double v = operator_norm_power(w, k, 256).value;
    EXPECT_GT(v, 1.0);
    const double rate = std::log(v) / k;
    if (k > 50) EXPECT_LT(rate, prev) << k;
    prev = rate;
  }
}

TEST(Linear, CatMapNorms) {
  const double lam = (3.0 + std::sqrt(5.0)) / 2.0;
  ToralAutomorphism a;
  for (int n = 1; n <= 8; ++n) EXPECT_NEAR(operator_norm(a, n), std::pow(lam, n), 1e-9 * std::pow(lam, n));
  EXPECT_NEAR(unstable_direction(a).value, lam, 1e-12);
  EXPECT_TRUE(a.hyperbolic());
}

TEST(MetricAxioms, RandomTriples) {
  std::vector<std::pair<SystemDescriptor, MeasureOracle>> cases{
      {cat_map(), {LebesgueTorus{}}},
      {dyadic_shift(64), {bernoulli({0.5, 0.5})}},
      {hilbert_shift(64), {markov({{0.9, 0.1}, {0.5, 0.5}})}},
      {product(cat_map(), dyadic_shift(64)), product_measure({LebesgueTorus{}}, {bernoulli({0.5, 0.5})})},
  };
  for (auto& [sys, o] : cases) {
    for (int t = 0; t < 1000; ++t) {
      auto x = sample_point(sys, o, derive_seed(1, t, 0));
      auto y = sample_point(sys, o, derive_seed(1, t, 1));
      auto z = sample_point(sys, o, derive_seed(1, t, 2));
      const double xy = distance(sys, x, y), yx = distance(sys, y, x);
      EXPECT_EQ(distance(sys, x, x), 0.0);
      EXPECT_NEAR(xy, yx, 1e-12);
      EXPECT_LE(distance(sys, x, z), xy + distance(sys, y, z) + 1e-12);
    }
  }
}
