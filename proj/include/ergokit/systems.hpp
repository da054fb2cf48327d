#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <string>
#include <variant>
#include <vector>

#include "ergokit/error.hpp"

namespace ergokit {

// ---------------------------------------------------------------------------
// Weights for the weighted l2 shift: a_k = 1/(k^p + 1), witness b_m = (m+1)^p.

struct WeightSequence {
  double power = 2.0;
  double witnessC = 2.0;

  double a(std::int64_t k) const {
    const double x = std::fabs(double(k));
    return 1.0 / ((power == 2.0 ? x * x : std::pow(x, power)) + 1.0);
  }
  double b(std::int64_t m) const { return std::pow(double(m) + 1.0, power); }

  /// Upper bound on sum_{k >= K} a_k: a_k <= k^-p, then the integral test.
  double tail_from(std::int64_t K) const {
    if (power <= 1.0) return std::numeric_limits<double>::infinity();
    if (K <= 0) return a(0) + tail_from(1);
    const double k = double(K);
    return std::pow(k, -power) + std::pow(k, 1.0 - power) / (power - 1.0);
  }

  /// Tighter upper bound: 4096 explicit terms, then the integral bound from there.
  double tail_sum(std::int64_t K) const {
    if (power <= 1.0) return std::numeric_limits<double>::infinity();
    const std::int64_t start = std::max<std::int64_t>(K, 0);
    double s = 0.0;
    for (std::int64_t k = start; k < start + 4096; ++k) s += a(k);
    return s + tail_from(start + 4096);
  }

  /// Largest a_k/a_l / (C b_{|k-l|}) over the grid 0 <= k,l <= K; <= 1 means the witness holds.
  double witness_ratio(std::int64_t K) const {
    double worst = 0.0;
    for (std::int64_t k = 0; k <= K; ++k)
      for (std::int64_t l = 0; l <= K; ++l)
        worst = std::max(worst, a(k) / a(l) / (witnessC * b(std::llabs(k - l))));
    return worst;
  }

  /// (1/k) |log b_k|, should go to zero.
  double subexp_rate(std::int64_t k) const { return std::fabs(std::log(b(k))) / double(k); }
};

inline void validate(const WeightSequence& w) {
  require(w.power > 1.0, ErrorKind::InvalidArgument, "weight power must exceed 1 for a summable sequence");
  require(w.witnessC > 0.0, ErrorKind::InvalidArgument, "witness constant must be positive");
}

// ---------------------------------------------------------------------------
// Systems

struct ToralAutomorphism {
  std::array<std::int64_t, 4> m{2, 1, 1, 1};  // row major [[m0,m1],[m2,m3]]

  std::int64_t det() const { return m[0] * m[3] - m[1] * m[2]; }
  std::int64_t trace() const { return m[0] + m[3]; }
  bool hyperbolic() const { return det() == 1 ? std::llabs(trace()) > 2 : det() == -1 && trace() != 0; }
};

/// Rigid rotation (x, y) -> (x + alpha, y + beta); the isometric reference system.
struct ToralTranslation {
  double alpha = 0.0;
  double beta = 0.0;
};

struct DyadicMetric {};
struct WeightedL2Metric {
  WeightSequence weights{};
};
using ShiftMetric = std::variant<DyadicMetric, WeightedL2Metric>;

/// Left shift (Tx)_i = x_{i+1} on alphabet^Z, truncated to -window..window.
/// `reversed` turns it into the right shift, i.e. the inverse system.
struct FullShift {
  int alphabet = 2;
  ShiftMetric metric = DyadicMetric{};
  int window = 256;
  bool reversed = false;

  bool dyadic() const { return std::holds_alternative<DyadicMetric>(metric); }
};

struct SystemDescriptor;
using SystemPtr = std::shared_ptr<const SystemDescriptor>;

/// Max-of-components metric.
struct ProductSystem {
  SystemPtr left;
  SystemPtr right;
};

struct SystemDescriptor {
  std::variant<ToralAutomorphism, ToralTranslation, FullShift, ProductSystem> v;
};

inline SystemPtr make_system(SystemDescriptor s) { return std::make_shared<const SystemDescriptor>(std::move(s)); }

inline SystemDescriptor cat_map() { return {ToralAutomorphism{}}; }

inline SystemDescriptor product(SystemDescriptor l, SystemDescriptor r) {
  return {ProductSystem{make_system(std::move(l)), make_system(std::move(r))}};
}

inline bool is_torus(const SystemDescriptor& s) {
  return std::holds_alternative<ToralAutomorphism>(s.v) || std::holds_alternative<ToralTranslation>(s.v);
}
inline const FullShift* as_shift(const SystemDescriptor& s) { return std::get_if<FullShift>(&s.v); }

inline void validate(const SystemDescriptor& s) {
  if (auto* a = std::get_if<ToralAutomorphism>(&s.v)) {
    require(std::llabs(a->det()) == 1, ErrorKind::NonInvertible,
            "toral automorphism needs |det A| = 1, got " + std::to_string(a->det()));
  } else if (auto* f = std::get_if<FullShift>(&s.v)) {
    require(f->alphabet >= 2 && f->alphabet <= 255, ErrorKind::InvalidArgument, "alphabet size must be in 2..255");
    require(f->window >= 1, ErrorKind::InvalidArgument, "window must be >= 1");
    if (auto* w = std::get_if<WeightedL2Metric>(&f->metric)) validate(w->weights);
  } else if (auto* p = std::get_if<ProductSystem>(&s.v)) {
    require(p->left && p->right, ErrorKind::InvalidArgument, "product needs two factors");
    validate(*p->left);
    validate(*p->right);
  }
}

inline SystemDescriptor inverse(const SystemDescriptor& s) {
  validate(s);
  return std::visit(
      [](const auto& sys) -> SystemDescriptor {
        using S = std::decay_t<decltype(sys)>;
        if constexpr (std::is_same_v<S, ToralAutomorphism>) {
          const std::int64_t d = sys.det();
          return {ToralAutomorphism{{d * sys.m[3], -d * sys.m[1], -d * sys.m[2], d * sys.m[0]}}};
        } else if constexpr (std::is_same_v<S, ToralTranslation>) {
          return {ToralTranslation{-sys.alpha, -sys.beta}};
        } else if constexpr (std::is_same_v<S, FullShift>) {
          FullShift r = sys;
          r.reversed = !r.reversed;
          return {r};
        } else {
          return {ProductSystem{make_system(inverse(*sys.left)), make_system(inverse(*sys.right))}};
        }
      },
      s.v);
}

// ---------------------------------------------------------------------------
// Points

/// Torus point stored as a 64-bit fixed-point base plus a small real offset.
/// The base makes T and T^-1 exact; the offset carries displacements far
/// below double resolution of the coordinates (ball radii like 1e-20 stay meaningful).
struct TorusPoint {
  std::uint64_t X = 0, Y = 0;
  double dx = 0.0, dy = 0.0;

  static constexpr double kUnit = 0x1.0p-64;

  static std::uint64_t to_fixed(double v) {
    v -= std::floor(v);
    const long double scaled = std::ldexp(static_cast<long double>(v), 64);
    if (scaled >= 0x1.0p64L) return 0;
    return static_cast<std::uint64_t>(scaled);
  }
  static TorusPoint from(double x, double y) {
    TorusPoint p;
    p.X = to_fixed(x);
    p.Y = to_fixed(y);
    return p;
  }

  double x() const { return wrap01(double(X) * kUnit + dx); }
  double y() const { return wrap01(double(Y) * kUnit + dy); }

  static double wrap01(double v) {
    v -= std::floor(v);
    return v >= 1.0 ? 0.0 : v;
  }
};

/// Displacement p - q reduced to [-1/2, 1/2)^2.
inline std::array<double, 2> torus_delta(const TorusPoint& p, const TorusPoint& q) {
  auto comp = [](std::uint64_t A, std::uint64_t B, double da, double db) {
    const double base = double(static_cast<std::int64_t>(A - B)) * TorusPoint::kUnit;
    double d = base + (da - db);
    return d - std::nearbyint(d);
  };
  return {comp(p.X, q.X, p.dx, q.dx), comp(p.Y, q.Y, p.dy, q.dy)};
}

/// x + (ox, oy) sharing x's base, so differences stay exact.
inline TorusPoint torus_offset(const TorusPoint& x, double ox, double oy) {
  TorusPoint p = x;
  p.dx += ox;
  p.dy += oy;
  p.dx -= std::nearbyint(p.dx);
  p.dy -= std::nearbyint(p.dy);
  return p;
}

/// Symbols on -window..window of the original sequence, viewed through a
/// shift: symbol(i) reads stored index i + shift.
struct SymbolicPoint {
  std::shared_ptr<const std::vector<std::uint8_t>> data;
  int window = 0;
  std::int64_t shift = 0;

  bool known(std::int64_t i) const { return std::llabs(i + shift) <= window; }
  std::uint8_t at(std::int64_t i) const {
    if (!known(i)) [[unlikely]]
      fail(ErrorKind::WindowExhausted, "symbol index " + std::to_string(i) + " outside the stored window");
    return (*data)[static_cast<std::size_t>(i + shift + window)];
  }
  std::int64_t lo() const { return -window - shift; }
  std::int64_t hi() const { return window - shift; }

  static SymbolicPoint from(std::vector<std::uint8_t> symbols) {
    require(symbols.size() % 2 == 1, ErrorKind::InvalidArgument, "symbol array must have odd length 2N+1");
    SymbolicPoint p;
    p.window = static_cast<int>(symbols.size() / 2);
    p.data = std::make_shared<const std::vector<std::uint8_t>>(std::move(symbols));
    return p;
  }

  /// Copy with symbol at index i replaced.
  SymbolicPoint with(std::int64_t i, std::uint8_t s) const {
    require(known(i), ErrorKind::WindowExhausted, "cannot modify symbol outside the window");
    auto copy = *data;
    copy[static_cast<std::size_t>(i + shift + window)] = s;
    SymbolicPoint p = *this;
    p.data = std::make_shared<const std::vector<std::uint8_t>>(std::move(copy));
    return p;
  }
};

struct Point;
using PointPtr = std::shared_ptr<const Point>;

struct ProductPoint {
  PointPtr left;
  PointPtr right;
};

struct Point {
  std::variant<TorusPoint, SymbolicPoint, ProductPoint> v;

  const TorusPoint& torus() const { return std::get<TorusPoint>(v); }
  const SymbolicPoint& symbolic() const { return std::get<SymbolicPoint>(v); }
  const ProductPoint& pair() const { return std::get<ProductPoint>(v); }
};

inline Point make_product_point(Point l, Point r) {
  return {ProductPoint{std::make_shared<const Point>(std::move(l)), std::make_shared<const Point>(std::move(r))}};
}

// ---------------------------------------------------------------------------
// Dynamics

namespace detail {

inline TorusPoint apply(const ToralAutomorphism& a, const TorusPoint& p) {
  TorusPoint q;
  const auto u = [](std::int64_t c) { return static_cast<std::uint64_t>(c); };
  q.X = u(a.m[0]) * p.X + u(a.m[1]) * p.Y;
  q.Y = u(a.m[2]) * p.X + u(a.m[3]) * p.Y;
  q.dx = double(a.m[0]) * p.dx + double(a.m[1]) * p.dy;
  q.dy = double(a.m[2]) * p.dx + double(a.m[3]) * p.dy;
  q.dx -= std::nearbyint(q.dx);
  q.dy -= std::nearbyint(q.dy);
  return q;
}

}  // namespace detail

/// T^n x. Symbolic points only move their read offset, so this is O(1) there.
inline Point iterate(const SystemDescriptor& sys, const Point& x, std::int64_t n) {
  return std::visit(
      [&](const auto& s) -> Point {
        using S = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<S, ToralAutomorphism>) {
          require(std::llabs(s.det()) == 1, ErrorKind::NonInvertible, "|det A| != 1");
          require(std::holds_alternative<TorusPoint>(x.v), ErrorKind::MixedSystems, "torus system needs a torus point");
          TorusPoint p = x.torus();
          if (n == 0) return {p};
          const ToralAutomorphism step = n > 0 ? s : std::get<ToralAutomorphism>(inverse({s}).v);
          for (std::int64_t k = 0; k < std::llabs(n); ++k) p = detail::apply(step, p);
          return {p};
        } else if constexpr (std::is_same_v<S, ToralTranslation>) {
          require(std::holds_alternative<TorusPoint>(x.v), ErrorKind::MixedSystems, "torus system needs a torus point");
          TorusPoint p = x.torus();
          p.X += static_cast<std::uint64_t>(n) * TorusPoint::to_fixed(s.alpha);
          p.Y += static_cast<std::uint64_t>(n) * TorusPoint::to_fixed(s.beta);
          return {p};
        } else if constexpr (std::is_same_v<S, FullShift>) {
          require(std::holds_alternative<SymbolicPoint>(x.v), ErrorKind::MixedSystems, "shift needs a symbolic point");
          SymbolicPoint p = x.symbolic();
          p.shift += s.reversed ? -n : n;
          if (std::llabs(p.shift) > p.window)
            fail(ErrorKind::WindowExhausted, "cumulative shift " + std::to_string(p.shift) + " exceeds window " +
                                                 std::to_string(p.window));
          return {p};
        } else {
          require(std::holds_alternative<ProductPoint>(x.v), ErrorKind::MixedSystems, "product needs a product point");
          return make_product_point(iterate(*s.left, *x.pair().left, n), iterate(*s.right, *x.pair().right, n));
        }
      },
      sys.v);
}

// ---------------------------------------------------------------------------
// Metrics

/// Distance restricted to what both points actually store, plus how far the
/// true distance could be from it because of the truncated window.
/// The true value lies in [value, value + slack] (dyadic, weighted: upper via
/// sqrt(value^2 + tail^2), folded into slack).
struct DistanceDetail {
  double value = 0.0;
  double slack = 0.0;
  double upper() const { return value + slack; }
};

namespace detail {

inline DistanceDetail torus_distance(const TorusPoint& p, const TorusPoint& q) {
  auto d = torus_delta(p, q);
  // min over the 9 lattice translates; d is already reduced, so the
  // untranslated term wins and keeps full relative precision
  const double ux = d[0], uy = d[1];
  double best = std::numeric_limits<double>::infinity();
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j) best = std::min(best, std::hypot(ux + i, uy + j));
  return {best, 0.0};
}

inline DistanceDetail dyadic_distance(const SymbolicPoint& p, const SymbolicPoint& q) {
  const std::int64_t lo = std::max(p.lo(), q.lo());
  const std::int64_t hi = std::min(p.hi(), q.hi());
  const std::int64_t reach = std::min(-lo, hi);  // every |i| <= reach is known in both
  for (std::int64_t k = 0; k <= reach; ++k) {
    if (p.at(k) != q.at(k) || p.at(-k) != q.at(-k)) return {std::ldexp(1.0, -int(k)), 0.0};
  }
  // agreement on |i| <= reach: look further on the side that is still known
  const double cap = std::ldexp(1.0, -int(reach + 1));
  for (std::int64_t k = reach + 1; k <= std::max(-lo, hi); ++k) {
    const bool diff = (k <= hi && p.at(k) != q.at(k)) || (-k >= lo && p.at(-k) != q.at(-k));
    if (diff) {
      const double v = std::ldexp(1.0, -int(k));
      return {v, cap - v};
    }
  }
  return {0.0, cap};
}

inline DistanceDetail weighted_distance(const WeightSequence& w, int alphabet, const SymbolicPoint& p,
                                        const SymbolicPoint& q) {
  const std::int64_t lo = std::max(p.lo(), q.lo());
  const std::int64_t hi = std::min(p.hi(), q.hi());
  double s = 0.0;
  for (std::int64_t i = lo; i <= hi; ++i) {
    const double d = double(p.at(i)) - double(q.at(i));
    if (d != 0.0) s += w.a(i) * d * d;
  }
  const double tail = (w.tail_from(-lo + 1) + w.tail_from(hi + 1)) * double(alphabet - 1) * double(alphabet - 1);
  const double v = std::sqrt(s);
  return {v, std::sqrt(s + tail) - v};
}

}  // namespace detail

inline DistanceDetail distance_detail(const SystemDescriptor& sys, const Point& x, const Point& y) {
  if (x.v.index() != y.v.index()) fail(ErrorKind::MixedSystems, "points come from different systems");
  if (is_torus(sys)) {
    require(std::holds_alternative<TorusPoint>(x.v), ErrorKind::MixedSystems, "torus system needs torus points");
    return detail::torus_distance(x.torus(), y.torus());
  }
  if (auto* f = as_shift(sys)) {
    require(std::holds_alternative<SymbolicPoint>(x.v), ErrorKind::MixedSystems, "shift needs symbolic points");
    if (f->dyadic()) return detail::dyadic_distance(x.symbolic(), y.symbolic());
    return detail::weighted_distance(std::get<WeightedL2Metric>(f->metric).weights, f->alphabet, x.symbolic(),
                                     y.symbolic());
  }
  const auto& ps = std::get<ProductSystem>(sys.v);
  require(std::holds_alternative<ProductPoint>(x.v), ErrorKind::MixedSystems, "product needs product points");
  auto l = distance_detail(*ps.left, *x.pair().left, *y.pair().left);
  auto r = distance_detail(*ps.right, *x.pair().right, *y.pair().right);
  const double v = std::max(l.value, r.value);
  return {v, std::max(l.upper(), r.upper()) - v};
}

/// Metric on the stored window. For weighted shifts the neglected tail is
/// reported by distance_detail / tail_bound.
inline double distance(const SystemDescriptor& sys, const Point& x, const Point& y) {
  return distance_detail(sys, x, y).value;
}

/// (sum_{|n|>N} a_|n|)^(1/2) scaled by the largest symbol gap.
inline double tail_bound(const FullShift& f) {
  if (f.dyadic()) return std::ldexp(1.0, -(f.window + 1));
  const auto& w = std::get<WeightedL2Metric>(f.metric).weights;
  return double(f.alphabet - 1) * std::sqrt(2.0 * w.tail_from(f.window + 1));
}

/// Smallest radius the representation can resolve.
inline double resolution_floor(const SystemDescriptor& sys) {
  if (is_torus(sys)) return 1e-30;
  if (auto* f = as_shift(sys)) return f->dyadic() ? std::ldexp(1.0, -f->window) : 2.0 * tail_bound(*f);
  const auto& p = std::get<ProductSystem>(sys.v);
  return std::max(resolution_floor(*p.left), resolution_floor(*p.right));
}

// ---------------------------------------------------------------------------
// Weighted-space helpers

/// (sum a_|n| |c_n|^2)^(1/2) for coefficients c on lo..lo+size-1.
inline double weighted_norm(const WeightSequence& w, const std::vector<double>& coeffs, std::int64_t lo) {
  double s = 0.0;
  for (std::size_t i = 0; i < coeffs.size(); ++i) s += w.a(lo + std::int64_t(i)) * coeffs[i] * coeffs[i];
  return std::sqrt(s);
}

struct OperatorNorm {
  double value = 1.0;          // sqrt of the max ratio on |n| <= N
  std::int64_t argmax = 0;
  double boundaryValue = 1.0;  // sqrt of the ratio just outside the window
  bool stabilized = true;      // max attained strictly inside and not exceeded at the boundary
};

/// ||T^k|| on the weighted space, computed as sqrt(max_{|n|<=N} a_|n-k| / a_|n|).
inline OperatorNorm operator_norm_power(const WeightSequence& w, std::int64_t k, std::int64_t N) {
  OperatorNorm r;
  double best = 0.0;
  for (std::int64_t n = -N; n <= N; ++n) {
    const double ratio = w.a(n - k) / w.a(n);
    if (ratio > best) {
      best = ratio;
      r.argmax = n;
    }
  }
  const double edge = std::max(w.a(N + 1 - k) / w.a(N + 1), w.a(-N - 1 - k) / w.a(-N - 1));
  r.value = std::sqrt(best);
  r.boundaryValue = std::sqrt(edge);
  r.stabilized = std::llabs(r.argmax) < N && edge <= best;
  return r;
}

}  // namespace ergokit
