#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ergokit/error.hpp"
#include "ergokit/linear.hpp"
#include "ergokit/measures.hpp"
#include "ergokit/partitions/lattice.hpp"
#include "ergokit/random.hpp"
#include "ergokit/systems.hpp"

namespace ergokit {

struct PointCloud {
  std::vector<Point> points;
  Point baseX;
  double delta = 0.0;
  int backHorizon = 0;
  double admissionTolerance = 0.0;
  int candidates = 0;
  int enumerationDepth = 0;  // symbolic clouds: coordinates enumerated exhaustively
};

namespace detail {

/// Admission: d(T^{-n} x, T^{-n} y) <= delta for n <= H and <= tol at n = H, using
/// the conservative distance bound. Returns -1 on success, else the first failing n.
inline int admission_failure(const SystemDescriptor& sys, const Point& x, const Point& y, double delta, int H,
                             double tol) {
  for (int n = 0; n <= H; ++n) {
    const double d = distance_detail(sys, iterate(sys, x, -n), iterate(sys, y, -n)).upper();
    if (d > delta || (n == H && d > tol)) return n;
  }
  return -1;
}

}  // namespace detail

/// Finite-horizon sample of the local unstable set W^u_delta(x).
///   hyperbolic torus automorphism: deterministic sweep x + t v, |t| <= 1.25 delta,
///   v the expanding eigenvector, trimmed by admission;
///   shifts: x's coordinates on the past side kept, the first D future coordinates
///   enumerated (alphabet^D <= budget), the rest drawn from the seed.
inline PointCloud sample_unstable_set(const SystemDescriptor& sys, const Point& x, double delta, int backHorizon,
                                      int budget, std::uint64_t seed, std::optional<double> tolerance = {}) {
  require(delta > 0.0 && backHorizon >= 0 && budget >= 1, ErrorKind::InvalidArgument,
          "need delta > 0, backHorizon >= 0, budget >= 1");
  PointCloud c;
  c.baseX = x;
  c.delta = delta;
  c.backHorizon = backHorizon;
  c.admissionTolerance = tolerance.value_or(delta / 8.0);
  int tightest = std::numeric_limits<int>::max();
  auto admit = [&](Point y) {
    ++c.candidates;
    const int f = detail::admission_failure(sys, x, y, delta, backHorizon, c.admissionTolerance);
    if (f < 0) c.points.push_back(std::move(y));
    else tightest = std::min(tightest, f);
  };

  if (const auto* a = std::get_if<ToralAutomorphism>(&sys.v)) {
    require(a->hyperbolic(), ErrorKind::UnsupportedSystem, "unstable sets need a hyperbolic automorphism");
    if (delta < resolution_floor(sys)) fail(ErrorKind::EmptyCloud, "delta below the resolution floor");
    const auto e = unstable_direction(*a);
    const auto& t0 = x.torus();
    const double span = 1.25 * delta;
    for (int i = 0; i < budget; ++i) {
      const double t = budget == 1 ? 0.0 : -span + 2.0 * span * double(i) / double(budget - 1);
      admit(Point{torus_offset(t0, t * e.vector[0], t * e.vector[1])});
    }
  } else if (const auto* f = as_shift(sys)) {
    require(backHorizon <= f->window, ErrorKind::WindowExhausted, "backHorizon exceeds the window");
    const auto& xs = x.symbolic();
    int D = 0;
    std::uint64_t total = 1;
    while (D < xs.hi() && total * std::uint64_t(f->alphabet) <= std::uint64_t(budget)) {
      total *= std::uint64_t(f->alphabet);
      ++D;
    }
    c.enumerationDepth = D;
    // free side: coordinates >= 1 for T, <= -1 for the reversed shift
    const int dir = f->reversed ? -1 : 1;
    const std::int64_t last = f->reversed ? -xs.lo() : xs.hi();
    for (std::uint64_t w = 0; w < total; ++w) {
      auto data = *xs.data;
      auto put = [&](std::int64_t i, std::uint8_t s) { data[std::size_t(dir * i + xs.shift + xs.window)] = s; };
      auto code = w;
      for (int j = 1; j <= D; ++j, code /= std::uint64_t(f->alphabet)) put(j, std::uint8_t(code % std::uint64_t(f->alphabet)));
      Rng rng(derive_seed(seed, w));
      for (std::int64_t j = D + 1; j <= last; ++j) put(j, std::uint8_t(rng.below(std::uint64_t(f->alphabet))));
      SymbolicPoint y = xs;
      y.data = std::make_shared<const std::vector<std::uint8_t>>(std::move(data));
      admit(Point{y});
    }
  } else {
    fail(ErrorKind::UnsupportedSystem, "unstable-set sampling supports hyperbolic torus automorphisms and shifts");
  }
  if (c.points.empty())
    fail(ErrorKind::EmptyCloud, "no candidate admitted; tightest failing n = " + std::to_string(tightest));
  return c;
}

// ---------------------------------------------------------------------------
// Box counting and local dimension

enum class DimensionMethod { BoxCount, LocalMass };

struct DimensionEstimate {
  DimensionMethod method = DimensionMethod::BoxCount;
  std::vector<double> scales;         // decreasing
  std::vector<double> values;         // box counts or masses
  std::vector<double> shiftedCounts;  // torus: grid origin moved by a quarter box
  std::vector<double> octaveSlopes;   // local slopes between consecutive scales
  double slope = 0.0;
  double slopeLo = 0.0, slopeHi = 0.0;  // 95% interval
  double liminfProxy = 0.0;             // LocalMass: min of log mu / log r over the trailing half
};

namespace detail {

inline double t_quantile_975(int df) {
  static const double q[] = {12.706, 4.303, 3.182, 2.776, 2.571, 2.447, 2.365, 2.306, 2.262, 2.228,
                             2.201,  2.179, 2.160, 2.145, 2.131, 2.120, 2.110, 2.101, 2.093, 2.086};
  return df >= 1 && df <= 20 ? q[df - 1] : 1.96;
}

/// Least-squares slope of ys against xs with a 95% interval.
inline void fit_slope(DimensionEstimate& e, const std::vector<double>& xs, const std::vector<double>& ys) {
  const double n = double(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  e.slope = sxy / sxx;
  double rss = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - my - e.slope * (xs[i] - mx);
    rss += r * r;
  }
  const double se = xs.size() > 2 ? std::sqrt(rss / (n - 2) / sxx) : 0.0;
  const double h = t_quantile_975(int(xs.size()) - 2) * se;
  e.slopeLo = e.slope - h;
  e.slopeHi = e.slope + h;
  e.octaveSlopes.clear();
  for (std::size_t i = 1; i < xs.size(); ++i) e.octaveSlopes.push_back((ys[i] - ys[i - 1]) / (xs[i] - xs[i - 1]));
}

inline void check_scales(const std::vector<double>& scales, double floor) {
  for (std::size_t i = 0; i < scales.size(); ++i) {
    require(scales[i] > 0.0, ErrorKind::InvalidArgument, "scales must be positive");
    require(i == 0 || scales[i] < scales[i - 1], ErrorKind::InvalidArgument, "scales must decrease");
  }
  const auto usable = std::count_if(scales.begin(), scales.end(), [&](double s) { return s > floor; });
  if (usable < 4 || usable != std::ptrdiff_t(scales.size()))
    fail(ErrorKind::TooFewScales, "need >= 4 scales, all above the resolution floor");
}

/// Half-width K of the coarsest symmetric window whose cylinders have diameter < eps.
inline std::int64_t window_for_scale(const SystemDescriptor& sys, double eps, std::int64_t maxK) {
  for (std::int64_t K = 0; K <= maxK; ++K)
    if (diameter_bound(window_partition(-K, K, as_shift(sys)->alphabet), sys) < eps) return K;
  fail(ErrorKind::ScaleUnderflow, "scale finer than the stored window resolves");
}

}  // namespace detail

/// Occupied boxes per scale, slope of log N(eps) against log(1/eps).
///   torus: half-open grid cells of side eps, origin 0 (and shifted by eps/4 as a robustness column);
///   shifts: distinct words on the window [-K, K], K the coarsest window with cylinder diameter < eps.
inline DimensionEstimate box_counting_dimension(const SystemDescriptor& sys, const PointCloud& cloud,
                                                const std::vector<double>& scales) {
  if (cloud.points.size() < 100) fail(ErrorKind::TooFewPoints, "box counting needs >= 100 points");
  detail::check_scales(scales, resolution_floor(sys));
  DimensionEstimate e;
  e.method = DimensionMethod::BoxCount;
  e.scales = scales;
  std::vector<double> xs, ys;
  for (double eps : scales) {
    if (is_torus(sys)) {
      std::set<std::pair<std::int64_t, std::int64_t>> cells, shifted;
      for (const auto& p : cloud.points) {
        const auto& t = p.torus();
        const double u = t.x(), v = t.y();
        cells.emplace(std::int64_t(std::floor(u / eps)), std::int64_t(std::floor(v / eps)));
        shifted.emplace(std::int64_t(std::floor(u / eps + 0.25)), std::int64_t(std::floor(v / eps + 0.25)));
      }
      e.values.push_back(double(cells.size()));
      e.shiftedCounts.push_back(double(shifted.size()));
    } else {
      const auto* f = as_shift(sys);
      require(f != nullptr, ErrorKind::UnsupportedSystem, "box counting supports torus and shift clouds");
      const auto K = detail::window_for_scale(sys, eps, f->window);
      std::set<std::vector<std::uint8_t>> words;
      for (const auto& p : cloud.points) {
        const auto& s = p.symbolic();
        std::vector<std::uint8_t> w;
        w.reserve(std::size_t(2 * K + 1));
        for (auto i = -K; i <= K; ++i) w.push_back(s.at(i));
        words.insert(std::move(w));
      }
      e.values.push_back(double(words.size()));
    }
    xs.push_back(-std::log(eps));
    ys.push_back(std::log(e.values.back()));
  }
  detail::fit_slope(e, xs, ys);
  return e;
}

/// Slope of log mu_x(B(y, r)) against log r over closed balls.
///   exact: dyadic shift with a Bernoulli, Markov or past-conditioned oracle; the
///   ball of radius 2^-k is the cylinder on |i| <= k-1 (coordinates below the
///   conditioned block are fixed by the conditioning);
///   otherwise the empirical measure of the cloud.
inline DimensionEstimate local_dimension_lower(const SystemDescriptor& sys, const PointCloud& cloud,
                                               const MeasureOracle* conditional, const Point& y,
                                               const std::vector<double>& scales) {
  detail::check_scales(scales, resolution_floor(sys));
  for (double r : scales) require(r < 1.0, ErrorKind::InvalidArgument, "local dimension needs scales below 1");
  DimensionEstimate e;
  e.method = DimensionMethod::LocalMass;
  e.scales = scales;
  const auto* f = as_shift(sys);
  const bool exact = conditional && f && f->dyadic() && !f->reversed && alphabet_of(*conditional) > 0;
  std::vector<double> xs, ys;
  for (double r : scales) {
    double logMass = 0.0;
    if (exact) {
      const int k = int(std::floor(-std::log2(r)));
      const auto* cp = std::get_if<ConditionedPast>(&conditional->v);
      const std::int64_t lo = cp ? std::max<std::int64_t>(-(k - 1), -cp->depth) : -(k - 1);
      std::vector<std::int64_t> coords;
      std::vector<std::uint8_t> sym;
      for (auto i = lo; i <= k - 1; ++i) {
        coords.push_back(i);
        sym.push_back(y.symbolic().at(i));
      }
      logMass = coords_log_measure(*conditional, coords, sym);
      if (!std::isfinite(logMass)) fail(ErrorKind::MassStarvation, "probe lies outside the conditional support");
    } else {
      std::size_t hits = 0;
      for (const auto& p : cloud.points) hits += distance(sys, p, y) <= r;
      if (hits == 0) fail(ErrorKind::MassStarvation, "empirical mass 0 at r = " + std::to_string(r));
      logMass = std::log(double(hits) / double(cloud.points.size()));
    }
    e.values.push_back(std::exp(logMass));
    xs.push_back(std::log(r));
    ys.push_back(logMass);
  }
  detail::fit_slope(e, xs, ys);
  e.liminfProxy = std::numeric_limits<double>::infinity();
  for (std::size_t i = xs.size() / 2; i < xs.size(); ++i) e.liminfProxy = std::min(e.liminfProxy, ys[i] / xs[i]);
  return e;
}

}  // namespace ergokit
