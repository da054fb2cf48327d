#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "ergokit/dimension.hpp"
#include "ergokit/lyapunov.hpp"
#include "ergokit/parallel.hpp"
#include "ergokit/partitions/disintegration.hpp"

namespace ergokit {

enum class Direction { Forward, Backward };

struct VerifyConfig {
  int basePoints = 20;
  double delta = 0.25;
  int backHorizon = 40;
  std::optional<double> admissionTolerance;  // default delta / 8
  int budget = 4096;
  std::vector<double> scales;       // box-counting scales, decreasing
  std::vector<double> localScales;  // mass-distribution scales (exact symbolic route only)
  int pastDepth = 16;
  ChiConfig chi;
  std::optional<double> hValue;  // closed form used when absent
  double chiFloor = 0.05;
  double slackFloor = -0.05;
  std::uint64_t seed = 1;
  int threads = 1;
};

struct BasePointResult {
  bool ok = false;
  std::string error;
  int cloudSize = 0;
  double dim = 0.0, slopeLo = 0.0, slopeHi = 0.0;
  std::vector<double> counts, octaveSlopes;
  bool increasingTail = false;  // last 4 octave slopes strictly increasing
  std::optional<double> localDim, localLiminf;
};

struct VerifyReport {
  Direction direction = Direction::Forward;
  std::vector<BasePointResult> perPoint;
  double dimEstimate = 0.0;  // mean box-dimension proxy over admitted base points
  std::optional<double> localDimEstimate;
  double hValue = 0.0;
  double chiEstimate = 0.0;
  double ratio = 0.0;  // h / chi; infinite in the divergence regime
  bool divergenceRegime = false;
  bool inequalityHolds = false;
  double slack = 0.0;  // dimEstimate - ratio
  int failedPoints = 0;
  bool partial() const { return failedPoints > 0; }
  std::string statement() const {
    if (divergenceRegime)
      return "chi estimate below the floor: ratio treated as infinite; box-count slopes must keep increasing";
    return "box-dimension proxy compared with h/chi; the proxy bounds dim_H from above, so agreement is evidence, "
           "not proof";
  }
};

/// Closed-form entropy of the system under the oracle.
inline double closed_form_entropy(const SystemDescriptor& sys, const MeasureOracle& o) {
  if (const auto* a = std::get_if<ToralAutomorphism>(&sys.v)) return log_expansion(*a);
  if (as_shift(sys)) return entropy_rate(o);
  fail(ErrorKind::UnsupportedSystem, "no closed-form entropy for this system");
}

inline VerifyReport verify_main_inequality(const SystemDescriptor& base, const MeasureOracle& o, Direction dir,
                                           VerifyConfig cfg) {
  require(cfg.basePoints >= 1, ErrorKind::InvalidArgument, "need at least one base point");
  const SystemDescriptor sys = dir == Direction::Forward ? base : inverse(base);
  VerifyReport rep;
  rep.direction = dir;
  rep.hValue = cfg.hValue ? *cfg.hValue : closed_form_entropy(sys, o);
  cfg.chi.threads = cfg.threads;
  rep.chiEstimate = estimate_chi(sys, o, cfg.chi).value;
  rep.divergenceRegime = rep.chiEstimate <= cfg.chiFloor;
  rep.ratio = rep.divergenceRegime ? std::numeric_limits<double>::infinity() : rep.hValue / rep.chiEstimate;
  if (rep.divergenceRegime) require(cfg.scales.size() >= 5, ErrorKind::TooFewScales, "divergence check needs 5 scales");

  const auto* f = as_shift(sys);
  const bool exactLocal = f && f->dyadic() && !f->reversed && !cfg.localScales.empty() &&
                          (std::holds_alternative<BernoulliIID>(o.v) || std::holds_alternative<MarkovStationary>(o.v));
  rep.perPoint.resize(std::size_t(cfg.basePoints));
  parallel_for(std::size_t(cfg.basePoints), cfg.threads, [&](std::size_t b) {
    auto& r = rep.perPoint[b];
    try {
      const auto x = sample_point(sys, o, derive_seed(cfg.seed, b, 0));
      const auto cloud = sample_unstable_set(sys, x, cfg.delta, cfg.backHorizon, cfg.budget,
                                             derive_seed(cfg.seed, b, 1), cfg.admissionTolerance);
      r.cloudSize = int(cloud.points.size());
      const auto e = box_counting_dimension(sys, cloud, cfg.scales);
      r.dim = e.slope;
      r.slopeLo = e.slopeLo;
      r.slopeHi = e.slopeHi;
      r.counts = e.values;
      r.octaveSlopes = e.octaveSlopes;
      const std::size_t m = r.octaveSlopes.size();
      r.increasingTail = m >= 4;
      for (std::size_t i = m >= 4 ? m - 3 : m; i < m; ++i)
        r.increasingTail = r.increasingTail && r.octaveSlopes[i] > r.octaveSlopes[i - 1];
      if (exactLocal) {
        const auto mx = disintegrate_past(o, cfg.pastDepth, x);
        const auto l = local_dimension_lower(sys, cloud, &mx, x, cfg.localScales);
        r.localDim = l.slope;
        r.localLiminf = l.liminfProxy;
      }
      r.ok = true;
    } catch (const Error& err) {
      r.error = err.what();
    }
  });

  double dimSum = 0.0, localSum = 0.0;
  int ok = 0;
  bool allIncreasing = true;
  for (const auto& r : rep.perPoint) {
    if (!r.ok) {
      ++rep.failedPoints;
      continue;
    }
    ++ok;
    dimSum += r.dim;
    if (r.localDim) localSum += *r.localDim;
    allIncreasing = allIncreasing && r.increasingTail;
  }
  if (ok == 0) {
    rep.inequalityHolds = false;
    return rep;
  }
  rep.dimEstimate = dimSum / ok;
  if (exactLocal) rep.localDimEstimate = localSum / ok;
  if (rep.divergenceRegime) {
    rep.slack = std::numeric_limits<double>::infinity();
    rep.inequalityHolds = allIncreasing;
  } else {
    rep.slack = rep.dimEstimate - rep.ratio;
    rep.inequalityHolds = rep.slack >= cfg.slackFloor;
  }
  return rep;
}

}  // namespace ergokit
