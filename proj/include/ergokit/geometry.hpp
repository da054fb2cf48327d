#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <vector>

#include "ergokit/error.hpp"
#include "ergokit/linear.hpp"
#include "ergokit/parallel.hpp"
#include "ergokit/random.hpp"
#include "ergokit/systems.hpp"

namespace ergokit {

/// max_{0<=k<n} d(T^k x, T^k y) < r, decided despite window truncation or WindowExhausted.
inline bool bowen_ball_contains(const SystemDescriptor& sys, const Point& x, const Point& y, int n, double r) {
  require(n >= 1 && r > 0.0, ErrorKind::InvalidArgument, "Bowen ball needs n >= 1 and r > 0");
  Point a = x, b = y;
  for (int k = 0; k < n; ++k) {
    if (k > 0) {
      a = iterate(sys, a, 1);
      b = iterate(sys, b, 1);
    }
    const auto d = distance_detail(sys, a, b);
    if (d.value >= r) return false;
    if (d.upper() >= r)
      fail(ErrorKind::WindowExhausted, "window too short to resolve the Bowen ball at step " + std::to_string(k));
  }
  return true;
}

// ---------------------------------------------------------------------------
// Probes

/// How a perturbation y of x is drawn with 0 < d(x,y) < rMax.
///   torus: log-uniform radius in [floor, rMax), uniform angle;
///   dyadic shift: one symbol changed at coordinate +-k with 2^-k < rMax;
///   weighted shift: one symbol changed where sqrt(a_|k|) < rMax;
///   product: left, right or both factors perturbed.
/// `uniformBall` switches the torus to area-uniform sampling in the disk.
inline Point sample_probe(const SystemDescriptor& sys, const Point& x, double rMax, double floor, Rng& rng,
                          bool uniformBall = false) {
  if (is_torus(sys)) {
    const double rho = uniformBall ? rMax * std::sqrt(rng.uniform())
                                   : floor * std::exp(rng.uniform() * std::log(rMax / floor));
    const double th = 2.0 * std::numbers::pi * rng.uniform();
    return {torus_offset(x.torus(), rho * std::cos(th), rho * std::sin(th))};
  }
  if (auto* f = as_shift(sys)) {
    const auto& p = x.symbolic();
    std::int64_t kmin, kmax = f->window - std::llabs(p.shift);
    if (f->dyadic()) {
      kmin = std::int64_t(std::floor(-std::log2(rMax))) + 1;
      kmax = std::min<std::int64_t>(kmax, std::int64_t(std::floor(-std::log2(floor))));
    } else {
      const auto& w = std::get<WeightedL2Metric>(f->metric).weights;
      // a_k (alphabet-1)^2 < rMax^2 for the largest possible symbol change
      const double g = double(f->alphabet - 1);
      kmin = 0;
      while (w.a(kmin) * g * g >= rMax * rMax) ++kmin;
    }
    kmin = std::max<std::int64_t>(kmin, 0);
    require(kmin <= kmax, ErrorKind::NoProbeAccepted, "no coordinate gives a perturbation inside the ball");
    std::int64_t k = rng.between(kmin, kmax);
    if (k > 0 && rng.uniform() < 0.5) k = -k;
    const std::uint8_t old = p.at(k);
    std::uint8_t s = std::uint8_t(rng.below(std::uint64_t(f->alphabet - 1)));
    if (s >= old) ++s;
    return {p.with(k, s)};
  }
  const auto& ps = std::get<ProductSystem>(sys.v);
  const auto which = rng.below(3);
  Point l = *x.pair().left, r = *x.pair().right;
  if (which != 1) l = sample_probe(*ps.left, l, rMax, floor, rng, uniformBall);
  if (which != 0) r = sample_probe(*ps.right, r, rMax, floor, rng, uniformBall);
  return make_product_point(std::move(l), std::move(r));
}

/// Per-probe record along the orbit; one trace serves every n and every r <= its radius.
struct ProbeTrace {
  double d0 = 0.0;
  std::vector<double> reach;    // reach[j]: max_{0<=k<n_j} upper d(T^k x, T^k y)
  std::vector<double> dn;       // dn[j]: d(T^{n_j} x, T^{n_j} y)
};

/// Traces `probes` perturbations of x drawn in B(x, r), following each orbit
/// up to the largest n in the (increasing) schedule.
inline std::vector<ProbeTrace> trace_probes(const SystemDescriptor& sys, const Point& x,
                                            const std::vector<int>& nSchedule, double r, int probes,
                                            std::uint64_t seed, double floor) {
  require(!nSchedule.empty(), ErrorKind::EmptySchedule, "n schedule is empty");
  require(probes >= 1, ErrorKind::InvalidArgument, "need at least one probe");
  require(r > floor, ErrorKind::ScaleUnderflow, "radius below the probe floor");
  std::vector<Point> orbit{x};
  orbit.reserve(std::size_t(nSchedule.back()) + 1);
  for (int k = 1; k <= nSchedule.back(); ++k) orbit.push_back(iterate(sys, orbit.back(), 1));
  std::vector<ProbeTrace> out(static_cast<std::size_t>(probes));
  for (int p = 0; p < probes; ++p) {
    Rng rng(derive_seed(seed, std::uint64_t(p)));
    Point y = sample_probe(sys, x, r, floor, rng);
    ProbeTrace& t = out[std::size_t(p)];
    t.d0 = distance(sys, x, y);
    double reach = 0.0;
    std::size_t j = 0;
    for (int k = 0; k <= nSchedule.back() && j < nSchedule.size(); ++k) {
      if (k > 0) y = iterate(sys, y, 1);
      const auto d = distance_detail(sys, orbit[std::size_t(k)], y);
      while (j < nSchedule.size() && nSchedule[j] == k) {
        t.reach.push_back(reach);
        t.dn.push_back(d.value);
        ++j;
      }
      reach = std::max(reach, d.upper());
      if (reach >= r) break;  // left every Bowen ball of radius <= r
    }
    while (t.reach.size() < nSchedule.size()) {
      t.reach.push_back(std::numeric_limits<double>::infinity());
      t.dn.push_back(0.0);
    }
  }
  return out;
}

struct LipschitzAtN {
  int n = 0;
  double value = 0.0;  // max stretch over accepted probes; a lower bound of the sup
  int accepted = 0;
};

/// L_n^r from stored traces, using only probes with d0 < r and reach < r.
inline std::vector<LipschitzAtN> lipschitz_from_probes(const std::vector<ProbeTrace>& traces,
                                                       const std::vector<int>& nSchedule, double r,
                                                       std::size_t use = std::size_t(-1)) {
  std::vector<LipschitzAtN> out(nSchedule.size());
  for (std::size_t j = 0; j < nSchedule.size(); ++j) out[j].n = nSchedule[j];
  const std::size_t m = std::min(use, traces.size());
  for (std::size_t p = 0; p < m; ++p) {
    const auto& t = traces[p];
    if (!(t.d0 > 0.0 && t.d0 < r)) continue;
    for (std::size_t j = 0; j < nSchedule.size(); ++j) {
      if (!(t.reach[j] < r)) break;
      out[j].value = std::max(out[j].value, t.dn[j] / t.d0);
      ++out[j].accepted;
    }
  }
  return out;
}

struct LipschitzEstimate {
  int n = 0;
  double r = 0.0;
  double value = 0.0;  // lower bound of L_n^r(x)
  int probeCount = 0;
  int accepted = 0;
  double probeRadiusFloor = 0.0;
  std::vector<std::pair<int, double>> curve;  // (probes used, value) at powers of two
};

inline LipschitzEstimate estimate_pointwise_lipschitz(const SystemDescriptor& sys, const Point& x, int n, double r,
                                                      int probes, std::uint64_t seed,
                                                      double probeRadiusFloor = 1e-13) {
  const std::vector<int> ns{n};
  const auto traces = trace_probes(sys, x, ns, r, probes, seed, probeRadiusFloor);
  LipschitzEstimate e;
  e.n = n;
  e.r = r;
  e.probeCount = probes;
  e.probeRadiusFloor = probeRadiusFloor;
  for (std::size_t m = 1;; m *= 2) {
    const auto v = lipschitz_from_probes(traces, ns, r, std::min<std::size_t>(m, traces.size()));
    e.curve.emplace_back(int(std::min<std::size_t>(m, traces.size())), v[0].value);
    if (m >= traces.size()) {
      e.value = v[0].value;
      e.accepted = v[0].accepted;
      break;
    }
  }
  if (e.accepted == 0)
    fail(ErrorKind::NoProbeAccepted, "no probe stayed in B_" + std::to_string(n) + "(x, " + std::to_string(r) +
                                         "); the radius is too small for the sampler");
  return e;
}

/// L_n for systems where it is known in closed form (linear maps on the torus).
inline std::optional<double> exact_lipschitz(const SystemDescriptor& sys, int n) {
  if (auto* a = std::get_if<ToralAutomorphism>(&sys.v)) return operator_norm(*a, n);
  if (std::holds_alternative<ToralTranslation>(sys.v)) return 1.0;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Ball inclusion B(x, eta e^{-n lambda}) in B_n(x, eps)

struct InclusionFailure {
  int n = 0;
  Point witness;
  double radius = 0.0;   // d(x, witness)
  int exitStep = 0;      // first k with d(T^k x, T^k witness) >= eps
};

struct InclusionReport {
  std::optional<int> holdsFromN;
  std::optional<InclusionFailure> firstFailure;
  std::vector<int> violationsPerN;  // index n-1
};

inline InclusionReport check_ball_inclusion(const SystemDescriptor& sys, const Point& x, double lambda, double eps,
                                            double eta, int nMax, int probesPerN, std::uint64_t seed) {
  require(lambda > 0 && eps > 0 && eta > 0 && eta < 1, ErrorKind::InvalidArgument,
          "need lambda > 0, eps > 0, eta in (0,1)");
  const double floor = resolution_floor(sys);
  InclusionReport rep;
  rep.violationsPerN.assign(std::size_t(nMax), 0);
  int lastBad = 0;
  for (int n = 1; n <= nMax; ++n) {
    const double rho = eta * std::exp(-double(n) * lambda);
    if (rho < floor)
      fail(ErrorKind::ScaleUnderflow, "radius " + std::to_string(rho) + " at n=" + std::to_string(n) +
                                          " is below the resolution floor");
    for (int p = 0; p < probesPerN; ++p) {
      Rng rng(derive_seed(seed, std::uint64_t(n), std::uint64_t(p)));
      Point y = sample_probe(sys, x, rho, floor, rng, /*uniformBall=*/true);
      Point a = x, b = y;
      int exit = -1;
      for (int k = 0; k < n; ++k) {
        if (k > 0) {
          a = iterate(sys, a, 1);
          b = iterate(sys, b, 1);
        }
        if (distance(sys, a, b) >= eps) {
          exit = k;
          break;
        }
      }
      if (exit >= 0) {
        ++rep.violationsPerN[std::size_t(n - 1)];
        lastBad = n;
        if (!rep.firstFailure) rep.firstFailure = InclusionFailure{n, y, distance(sys, x, y), exit};
      }
    }
  }
  if (lastBad < nMax) rep.holdsFromN = lastBad + 1;
  return rep;
}

}  // namespace ergokit
