#pragma once

#include <vector>

#include "ergokit/error.hpp"
#include "ergokit/measures.hpp"

namespace ergokit {

/// Conditional measure of the oracle given the past block x_{-P..0}, the
/// depth-P stand-in for the disintegration over the past partition.
inline MeasureOracle disintegrate_past(const MeasureOracle& o, int P, const Point& x) {
  require(P >= 0, ErrorKind::InvalidArgument, "past depth must be >= 0");
  require(std::holds_alternative<BernoulliIID>(o.v) || std::holds_alternative<MarkovStationary>(o.v),
          ErrorKind::UnsupportedOracle, "disintegration is implemented for Bernoulli and Markov oracles");
  const auto& xs = x.symbolic();
  ConditionedPast c;
  c.base = make_oracle(o);
  c.depth = P;
  std::vector<std::int64_t> coords;
  for (int i = -P; i <= 0; ++i) {
    coords.push_back(i);
    c.block.push_back(xs.at(i));
  }
  if (!std::isfinite(coords_log_measure(o, coords, c.block)))
    fail(ErrorKind::ZeroMassAtom, "past block of x has zero measure");
  return {c};
}

}  // namespace ergokit
