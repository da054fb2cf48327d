#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ergokit/entropy.hpp"
#include "ergokit/error.hpp"
#include "ergokit/parallel.hpp"
#include "ergokit/partitions/disintegration.hpp"
#include "ergokit/random.hpp"

namespace ergokit {

struct SmbLevel {
  int n = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  double lengthFactor = 1.0;  // shift lemma: (n - k + 1) / (n + 1); 1 otherwise
};

struct SmbReport {
  std::vector<SmbLevel> levels;
  std::vector<SmbLevel> shifted;  // shift lemma only
  double limitEstimate = 0.0;     // trailing mean over the upper half of the schedule
  double shiftedLimit = 0.0;
  double target = 0.0;
  double relError = 0.0;
  bool converged = false;
  int paths = 0;
};

namespace detail {

inline double trailing_mean(const std::vector<SmbLevel>& ls) {
  const std::size_t start = ls.size() / 2;
  double s = 0.0;
  for (std::size_t i = start; i < ls.size(); ++i) s += ls[i].mean;
  return s / double(ls.size() - start);
}

inline void fill_stats(SmbLevel& l, const std::vector<double>& v) {
  double m = 0.0, q = 0.0;
  for (double a : v) m += a;
  m /= double(v.size());
  for (double a : v) q += (a - m) * (a - m);
  l.mean = m;
  l.stderr_ = v.size() > 1 ? std::sqrt(q / double(v.size() - 1) / double(v.size())) : 0.0;
}

/// Coordinates of join_{k=lo..hi} T^{-k} alpha.
inline std::vector<std::int64_t> join_coords(const CylinderCoords& a, std::int64_t lo, std::int64_t hi) {
  std::vector<std::int64_t> c;
  for (auto k = lo; k <= hi; ++k)
    for (auto s : a.coords) c.push_back(s + k);
  std::sort(c.begin(), c.end());
  c.erase(std::unique(c.begin(), c.end()), c.end());
  return c;
}

inline std::vector<std::uint8_t> pick(const SymbolicPoint& x, const std::vector<std::int64_t>& coords) {
  std::vector<std::uint8_t> w(coords.size());
  for (std::size_t i = 0; i < coords.size(); ++i) w[i] = x.at(coords[i]);
  return w;
}

inline void check_schedule(const std::vector<int>& ns) {
  require(!ns.empty(), ErrorKind::EmptySchedule, "n schedule is empty");
  for (std::size_t i = 0; i < ns.size(); ++i) {
    require(ns[i] >= 1, ErrorKind::InvalidArgument, "schedule entries must be >= 1");
    require(i == 0 || ns[i] > ns[i - 1], ErrorKind::InvalidArgument, "schedule must increase");
  }
}

}  // namespace detail

/// Local Shannon-McMillan-Breiman check: x ~ mu, y ~ mu_x (conditioned on the
/// past block of depth P), alpha_N = join_{k=1..N} T^{-k} alpha, and the
/// sequence -log mu_x(alpha_N(y)) / N against h_mu(T, alpha).
inline SmbReport local_smb_check(const MeasureOracle& o, int P, const FinitePartition& alpha,
                                 const std::vector<int>& ns, int paths, std::uint64_t seed, double tol = 0.02,
                                 int threads = 1) {
  detail::check_schedule(ns);
  require(paths >= 2, ErrorKind::InvalidArgument, "need at least two sample paths");
  const auto& a = detail::need_cylinder(alpha);
  require(!a.coords.empty(), ErrorKind::InvalidArgument, "alpha must be non-trivial");
  require(a.coords.front() + 1 >= -P, ErrorKind::UnsupportedOracle, "alpha reaches below the conditioned block");
  const int W = int(std::max<std::int64_t>({std::int64_t(P), ns.back() + a.coords.back(), -a.coords.front()})) + 1;
  std::vector<std::vector<double>> vals(ns.size(), std::vector<double>(std::size_t(paths)));
  parallel_for(std::size_t(paths), threads, [&](std::size_t s) {
    const auto xSym = detail::sample_symbols(o, W, derive_seed(seed, s, 0));
    const Point x{SymbolicPoint::from(xSym)};
    const auto mx = disintegrate_past(o, P, x);
    const auto ySym = detail::sample_symbols(mx, W, derive_seed(seed, s, 1));
    const auto y = SymbolicPoint::from(ySym);
    for (std::size_t j = 0; j < ns.size(); ++j) {
      const auto c = detail::join_coords(a, 1, ns[j]);
      vals[j][s] = -coords_log_measure(mx, c, detail::pick(y, c)) / ns[j];
    }
  });
  SmbReport r;
  r.paths = paths;
  for (std::size_t j = 0; j < ns.size(); ++j) {
    SmbLevel l;
    l.n = ns[j];
    detail::fill_stats(l, vals[j]);
    r.levels.push_back(l);
  }
  r.limitEstimate = detail::trailing_mean(r.levels);
  r.target = entropy_rate(o);
  r.relError = r.target > 0 ? std::fabs(r.limitEstimate - r.target) / r.target : std::fabs(r.limitEstimate);
  r.converged = r.relError <= tol;
  return r;
}

/// Shift lemma: -log mu(alpha_0^n(x)) / n and -log mu(alpha_k^n(x)) / n share
/// their limit; the shifted join has (n - k + 1) of the n + 1 factors.
inline SmbReport shift_lemma_check(const MeasureOracle& o, const FinitePartition& alpha, int k,
                                   const std::vector<int>& ns, int paths, std::uint64_t seed, double tol = 0.01,
                                   int threads = 1) {
  detail::check_schedule(ns);
  require(k >= 0 && k < ns.front(), ErrorKind::InvalidArgument, "need 0 <= k < min n");
  require(paths >= 2, ErrorKind::InvalidArgument, "need at least two sample paths");
  const auto& a = detail::need_cylinder(alpha);
  require(!a.coords.empty(), ErrorKind::InvalidArgument, "alpha must be non-trivial");
  const int W = int(std::max<std::int64_t>(ns.back() + a.coords.back(), -a.coords.front())) + 1;
  std::vector<std::vector<double>> v0(ns.size(), std::vector<double>(std::size_t(paths))), vk = v0;
  parallel_for(std::size_t(paths), threads, [&](std::size_t s) {
    const auto x = SymbolicPoint::from(detail::sample_symbols(o, W, derive_seed(seed, s)));
    for (std::size_t j = 0; j < ns.size(); ++j) {
      const auto c0 = detail::join_coords(a, 0, ns[j]);
      const auto ck = detail::join_coords(a, k, ns[j]);
      v0[j][s] = -coords_log_measure(o, c0, detail::pick(x, c0)) / ns[j];
      vk[j][s] = -coords_log_measure(o, ck, detail::pick(x, ck)) / ns[j];
    }
  });
  SmbReport r;
  r.paths = paths;
  for (std::size_t j = 0; j < ns.size(); ++j) {
    SmbLevel l0, lk;
    l0.n = lk.n = ns[j];
    detail::fill_stats(l0, v0[j]);
    detail::fill_stats(lk, vk[j]);
    lk.lengthFactor = double(ns[j] - k + 1) / double(ns[j] + 1);
    r.levels.push_back(l0);
    r.shifted.push_back(lk);
  }
  r.limitEstimate = detail::trailing_mean(r.levels);
  r.shiftedLimit = detail::trailing_mean(r.shifted);
  r.target = entropy_rate(o);
  r.relError = r.limitEstimate > 0 ? std::fabs(r.limitEstimate - r.shiftedLimit) / r.limitEstimate
                                   : std::fabs(r.shiftedLimit);
  r.converged = r.relError <= tol;
  return r;
}

}  // namespace ergokit
