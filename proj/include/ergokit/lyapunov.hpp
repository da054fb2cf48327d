#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "ergokit/error.hpp"
#include "ergokit/geometry.hpp"
#include "ergokit/measures.hpp"
#include "ergokit/parallel.hpp"

namespace ergokit {

struct SubadditiveSeries {
  std::vector<int> nSchedule;
  std::vector<double> values;  // phi_n, mean of log+ L_n^r
  double r = 0.0;
};

struct FeketeResult {
  double value = 0.0;      // min phi_n / n over the schedule
  int argmin = 0;
  double lastSlope = 0.0;  // phi_nMax / nMax
};

inline FeketeResult fekete_limit(const SubadditiveSeries& s) {
  require(!s.nSchedule.empty() && s.nSchedule.size() == s.values.size(), ErrorKind::EmptySchedule,
          "subadditive series has no usable entries");
  FeketeResult f;
  f.value = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < s.values.size(); ++j) {
    require(s.values[j] >= 0.0, ErrorKind::InvalidArgument, "subadditive values must be nonnegative");
    const double q = s.values[j] / s.nSchedule[j];
    if (q < f.value) {
      f.value = q;
      f.argmin = s.nSchedule[j];
    }
  }
  f.lastSlope = s.values.back() / s.nSchedule.back();
  return f;
}

struct ChiConfig {
  std::vector<double> rSchedule{0.2, 0.1, 0.05};  // decreasing
  std::vector<int> nSchedule;                     // increasing; empty means 1..64
  int samplePoints = 2000;
  int probes = 64;
  std::uint64_t seed = 1;
  double probeRadiusFloor = 1e-13;
  int threads = 1;
};

struct ChiAtR {
  double r = 0.0;
  double lambda = 0.0;               // Fekete limit of the mean series
  int argminN = 0;
  double lastSlope = 0.0;
  std::vector<double> phi;           // mean log+ L_n^r per n
  std::vector<int> usedPoints;       // per n, points with at least one accepted probe
  int excluded = 0;                  // (x, n) pairs with no accepted probe
};

struct ChiDiagnostics {
  bool monotoneInR = true;   // lambda nonincreasing along the r schedule within 0.05
  double fluctuation = 0.0;  // standard error of phi_nMax/nMax across points at the smallest r
  double maxLogL1Half = 0.0; // integrability guard: max log+ L_1^r over the first half of the points
  double maxLogL1All = 0.0;  // ... and over all points
  bool integrabilityFlag = false;
};

struct ChiEstimate {
  double value = 0.0;  // lambda at the smallest r
  std::vector<ChiAtR> perR;
  int sampleCount = 0;
  std::vector<int> nSchedule;
  ChiDiagnostics diagnostics;
};

inline void validate(const ChiConfig& c) {
  require(!c.rSchedule.empty(), ErrorKind::EmptySchedule, "r schedule is empty");
  for (std::size_t i = 1; i < c.rSchedule.size(); ++i)
    require(c.rSchedule[i] < c.rSchedule[i - 1], ErrorKind::InvalidArgument, "r schedule must be decreasing");
  for (std::size_t i = 1; i < c.nSchedule.size(); ++i)
    require(c.nSchedule[i] > c.nSchedule[i - 1], ErrorKind::InvalidArgument, "n schedule must be increasing");
  require(c.nSchedule.empty() || c.nSchedule.front() >= 1, ErrorKind::InvalidArgument, "n must be >= 1");
  require(c.samplePoints >= 1 && c.probes >= 1, ErrorKind::InvalidArgument, "budgets must be positive");
}

/// Mean-of-log+ L_n^r over mu-samples, Fekete in n, reported per r.
/// The oracle is assumed ergodic, so the space average stands in for chi(x).
inline ChiEstimate estimate_chi(const SystemDescriptor& sys, const MeasureOracle& oracle, ChiConfig cfg) {
  if (cfg.nSchedule.empty())
    for (int n = 1; n <= 64; ++n) cfg.nSchedule.push_back(n);
  validate(cfg);
  const double floor = std::max(cfg.probeRadiusFloor, resolution_floor(sys));
  require(cfg.rSchedule.back() > floor, ErrorKind::ScaleUnderflow, "smallest r is below the resolution floor");
  const std::size_t P = std::size_t(cfg.samplePoints), R = cfg.rSchedule.size(), J = cfg.nSchedule.size();

  // per point, per r, per n: log+ L or NaN when no probe was accepted
  std::vector<std::vector<double>> logs(P, std::vector<double>(R * J));
  parallel_for(P, cfg.threads, [&](std::size_t i) {
    const Point x = sample_point(sys, oracle, derive_seed(cfg.seed, i, 0));
    const auto traces =
        trace_probes(sys, x, cfg.nSchedule, cfg.rSchedule.front(), cfg.probes, derive_seed(cfg.seed, i, 1), floor);
    for (std::size_t ri = 0; ri < R; ++ri) {
      const auto L = lipschitz_from_probes(traces, cfg.nSchedule, cfg.rSchedule[ri]);
      for (std::size_t j = 0; j < J; ++j)
        logs[i][ri * J + j] = L[j].accepted > 0 ? std::max(0.0, std::log(L[j].value)) : std::nan("");
    }
  });

  ChiEstimate est;
  est.sampleCount = cfg.samplePoints;
  est.nSchedule = cfg.nSchedule;
  for (std::size_t ri = 0; ri < R; ++ri) {
    ChiAtR a;
    a.r = cfg.rSchedule[ri];
    a.phi.assign(J, 0.0);
    a.usedPoints.assign(J, 0);
    for (std::size_t i = 0; i < P; ++i)  // fixed index order
      for (std::size_t j = 0; j < J; ++j) {
        const double v = logs[i][ri * J + j];
        if (std::isnan(v)) {
          ++a.excluded;
          continue;
        }
        a.phi[j] += v;
        ++a.usedPoints[j];
      }
    SubadditiveSeries s;
    s.r = a.r;
    for (std::size_t j = 0; j < J; ++j) {
      if (a.usedPoints[j] == 0) continue;
      a.phi[j] /= a.usedPoints[j];
      s.nSchedule.push_back(cfg.nSchedule[j]);
      s.values.push_back(a.phi[j]);
    }
    const auto f = fekete_limit(s);
    a.lambda = f.value;
    a.argminN = f.argmin;
    a.lastSlope = f.lastSlope;
    est.perR.push_back(std::move(a));
  }
  est.value = est.perR.back().lambda;

  auto& d = est.diagnostics;
  for (std::size_t ri = 1; ri < R; ++ri)
    if (est.perR[ri].lambda > est.perR[ri - 1].lambda + 0.05) d.monotoneInR = false;
  {
    const std::size_t base = (R - 1) * J + (J - 1);
    double s = 0.0, s2 = 0.0;
    int m = 0;
    for (std::size_t i = 0; i < P; ++i) {
      const double v = logs[i][base];
      if (std::isnan(v)) continue;
      const double q = v / cfg.nSchedule.back();
      s += q;
      s2 += q * q;
      ++m;
    }
    if (m > 1) d.fluctuation = std::sqrt(std::max(0.0, (s2 - s * s / m) / (m - 1)) / m);
  }
  for (std::size_t i = 0; i < P; ++i) {
    const double v = logs[i][(R - 1) * J];
    if (std::isnan(v)) continue;
    if (i < P / 2) d.maxLogL1Half = std::max(d.maxLogL1Half, v);
    d.maxLogL1All = std::max(d.maxLogL1All, v);
  }
  d.integrabilityFlag = d.maxLogL1All > 1.1 * d.maxLogL1Half + 1e-12;
  return est;
}

}  // namespace ergokit
