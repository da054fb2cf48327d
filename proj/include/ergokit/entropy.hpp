#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "ergokit/error.hpp"
#include "ergokit/geometry.hpp"
#include "ergokit/measures.hpp"
#include "ergokit/parallel.hpp"
#include "ergokit/partitions/lattice.hpp"

namespace ergokit {

enum class EstimateMode { Exact, MonteCarlo };

/// Neumaier summation; entropy sums run over up to 2^24 atoms.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    comp_ += std::fabs(sum_) >= std::fabs(v) ? (sum_ - t) + v : (v - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0, comp_ = 0.0;
};

struct EntropyEstimate {
  double value = 0.0;  // nats
  EstimateMode mode = EstimateMode::Exact;
  int nUsed = 0;
  long sampleCount = 0;
  double stderr_ = 0.0;  // MonteCarlo only
};

// ---------------------------------------------------------------------------
// The law of (z_c) along sorted coordinates c_0 < c_1 < ... is a Markov chain
// for every symbolic oracle here: an initial vector plus one transition matrix
// per consecutive pair.

struct CoordLaw {
  std::vector<std::int64_t> coords;
  Eigen::VectorXd init;
  std::vector<Eigen::MatrixXd> steps;  // steps[j] maps position j to j+1
  int alphabet = 0;
};

inline CoordLaw coord_law(const MeasureOracle& o, std::vector<std::int64_t> coords) {
  const int a = alphabet_of(o);
  require(a > 0, ErrorKind::UnsupportedOracle, "exact partition measures need a symbolic oracle");
  std::sort(coords.begin(), coords.end());
  CoordLaw L;
  L.alphabet = a;
  L.coords = coords;
  const Eigen::Index A = a;
  if (coords.empty()) return L;

  auto rows_equal = [&](const Eigen::RowVectorXd& r) {
    Eigen::MatrixXd M(A, A);
    for (Eigen::Index i = 0; i < A; ++i) M.row(i) = r;
    return M;
  };
  auto vec = [&](const std::vector<double>& v) {
    Eigen::VectorXd e(A);
    for (Eigen::Index i = 0; i < A; ++i) e(i) = v[std::size_t(i)];
    return e;
  };
  auto unit = [&](int s) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(A);
    e(s) = 1.0;
    return e;
  };

  const MeasureOracle* base = &o;
  const ConditionedPast* cp = std::get_if<ConditionedPast>(&o.v);
  if (cp) base = cp->base.get();
  const auto* bern = std::get_if<BernoulliIID>(&base->v);
  const auto* mk = std::get_if<MarkovStationary>(&base->v);
  require(bern || mk, ErrorKind::UnsupportedOracle, "exact partition measures need Bernoulli or Markov");
  std::optional<detail::PowerCache> pc;
  if (mk) pc.emplace(mk->P);

  if (!cp) {
    L.init = bern ? vec(bern->p) : vec(mk->pi);
    for (std::size_t j = 1; j < coords.size(); ++j)
      L.steps.push_back(bern ? rows_equal(vec(bern->p).transpose()) : pc->get(coords[j] - coords[j - 1]));
    return L;
  }
  require(coords.front() >= -cp->depth, ErrorKind::UnsupportedOracle,
          "conditional measure is only evaluable on coordinates >= -depth");
  const int x0 = cp->block[std::size_t(cp->depth)];
  auto fixed_sym = [&](std::int64_t c) { return int(cp->block[std::size_t(c + cp->depth)]); };
  auto from_x0 = [&](std::int64_t c) -> Eigen::RowVectorXd {
    if (bern) return vec(bern->p).transpose();
    return pc->get(c).row(x0);
  };
  L.init = coords[0] <= 0 ? unit(fixed_sym(coords[0])) : Eigen::VectorXd(from_x0(coords[0]).transpose());
  for (std::size_t j = 1; j < coords.size(); ++j) {
    const auto c = coords[j], prev = coords[j - 1];
    if (c <= 0) L.steps.push_back(rows_equal(unit(fixed_sym(c)).transpose()));
    else if (prev <= 0) L.steps.push_back(rows_equal(from_x0(c)));
    else L.steps.push_back(bern ? rows_equal(vec(bern->p).transpose()) : pc->get(c - prev));
  }
  return L;
}

/// H(z_S) through the chain rule along the sorted coordinates; exact, no enumeration.
inline double joint_entropy(const CoordLaw& L) {
  if (L.coords.empty()) return 0.0;
  auto H = [](const Eigen::VectorXd& p) {
    double h = 0.0;
    for (Eigen::Index i = 0; i < p.size(); ++i)
      if (p(i) > 0) h -= p(i) * std::log(p(i));
    return h;
  };
  double h = H(L.init);
  Eigen::VectorXd m = L.init;
  for (const auto& T : L.steps) {
    for (Eigen::Index i = 0; i < m.size(); ++i)
      if (m(i) > 0) h += m(i) * H(T.row(i).transpose());
    m = (m.transpose() * T).transpose();
  }
  return h;
}

inline double log_measure(const CoordLaw& L, std::span<const std::uint8_t> w) {
  if (L.coords.empty()) return 0.0;
  double lp = detail::safe_log(L.init(w[0]));
  for (std::size_t j = 1; j < w.size(); ++j) lp += detail::safe_log(L.steps[j - 1](w[j - 1], w[j]));
  return lp;
}

/// Depth-first enumeration of every word with positive mass: fn(word, prob).
template <class Fn>
void enumerate_words(const CoordLaw& L, Fn&& fn) {
  std::uint64_t n = 1;
  for (std::size_t i = 0; i < L.coords.size(); ++i) {
    n *= std::uint64_t(L.alphabet);
    require(n <= kAtomBudget, ErrorKind::AtomBudgetExceeded,
            "enumeration of " + std::to_string(L.coords.size()) + " coordinates exceeds 2^24 atoms");
  }
  std::vector<std::uint8_t> w(L.coords.size());
  if (w.empty()) {
    fn(w, 1.0);
    return;
  }
  auto rec = [&](auto&& self, std::size_t j, double p) -> void {
    if (j == w.size()) {
      fn(std::as_const(w), p);
      return;
    }
    for (int s = 0; s < L.alphabet; ++s) {
      const double q = j == 0 ? L.init(s) : p * L.steps[j - 1](w[j - 1], s);
      if (q <= 0.0) continue;
      w[j] = std::uint8_t(s);
      self(self, j + 1, q);
    }
  };
  rec(rec, 0, 1.0);
}

inline std::vector<std::uint8_t> sample_word(const CoordLaw& L, Rng& rng) {
  std::vector<std::uint8_t> w(L.coords.size());
  for (std::size_t j = 0; j < w.size(); ++j) {
    const double u = rng.uniform();
    double acc = 0.0;
    int s = 0;
    for (; s + 1 < L.alphabet; ++s) {
      acc += j == 0 ? L.init(s) : L.steps[j - 1](w[j - 1], s);
      if (u < acc) break;
    }
    w[j] = std::uint8_t(s);
  }
  return w;
}

// ---------------------------------------------------------------------------
// Conditional information and entropy for cylinder partitions

namespace detail {

inline const CylinderCoords& need_cylinder(const FinitePartition& p) {
  const auto* c = p.cylinder();
  require(c != nullptr, ErrorKind::UnsupportedOracle, "exact entropies are implemented for cylinder partitions");
  return *c;
}

inline std::vector<std::int64_t> union_coords(const CylinderCoords& a, const CylinderCoords& b) {
  std::vector<std::int64_t> u;
  std::set_union(a.coords.begin(), a.coords.end(), b.coords.begin(), b.coords.end(), std::back_inserter(u));
  return u;
}

}  // namespace detail

/// I(alpha | cond)(x) = -log( mu(alpha(x) & cond(x)) / mu(cond(x)) ).
inline double information_function(const FinitePartition& alpha, const FinitePartition& cond,
                                   const MeasureOracle& o, const Point& x) {
  const auto& a = detail::need_cylinder(alpha);
  const auto& c = detail::need_cylinder(cond);
  const auto u = detail::union_coords(a, c);
  const auto& xs = x.symbolic();
  auto word = [&](const std::vector<std::int64_t>& cs) {
    std::vector<std::uint8_t> w(cs.size());
    for (std::size_t i = 0; i < cs.size(); ++i) w[i] = xs.at(cs[i]);
    return w;
  };
  const double lc = coords_log_measure(o, c.coords, word(c.coords));
  if (!std::isfinite(lc)) fail(ErrorKind::ZeroMassAtom, "conditioning atom of x has zero measure");
  const double lu = coords_log_measure(o, u, word(u));
  return std::max(0.0, lc - lu);
}

enum class EntropyRoute { ChainRule, Enumerate };

/// H(alpha | cond) = H(alpha v cond) - H(cond), exact either through the chain
/// rule along coordinates or by full atom enumeration (budget 2^24).
inline EntropyEstimate conditional_entropy(const FinitePartition& alpha, const FinitePartition& cond,
                                           const MeasureOracle& o, EntropyRoute route = EntropyRoute::ChainRule) {
  const auto& a = detail::need_cylinder(alpha);
  const auto& c = detail::need_cylinder(cond);
  const auto u = detail::union_coords(a, c);
  EntropyEstimate e;
  if (route == EntropyRoute::ChainRule) {
    e.value = joint_entropy(coord_law(o, u)) - joint_entropy(coord_law(o, c.coords));
  } else {
    // positions of cond's coordinates inside u
    std::vector<std::size_t> pos;
    for (auto i : c.coords) pos.push_back(std::size_t(std::lower_bound(u.begin(), u.end(), i) - u.begin()));
    std::map<std::vector<std::uint8_t>, double> condMass;
    std::vector<std::pair<std::vector<std::uint8_t>, double>> joint;
    enumerate_words(coord_law(o, u), [&](const std::vector<std::uint8_t>& w, double p) {
      std::vector<std::uint8_t> key(pos.size());
      for (std::size_t k = 0; k < pos.size(); ++k) key[k] = w[pos[k]];
      condMass[key] += p;
      joint.emplace_back(std::move(key), p);
    });
    CompensatedSum h;
    for (const auto& [key, p] : joint) h.add(-p * std::log(p / condMass[key]));
    e.value = h.value();
  }
  e.value = std::max(0.0, e.value);
  e.nUsed = int(u.size());
  return e;
}

inline EntropyEstimate entropy(const FinitePartition& alpha, const MeasureOracle& o,
                               EntropyRoute route = EntropyRoute::ChainRule) {
  return conditional_entropy(alpha, trivial_partition(detail::need_cylinder(alpha).alphabet), o, route);
}

/// alpha_m^n = join of T^{-k} alpha for k = m..n.
inline FinitePartition dynamical_join(const FinitePartition& alpha, std::int64_t m, std::int64_t n) {
  const auto& a = detail::need_cylinder(alpha);
  std::vector<std::int64_t> c;
  for (std::int64_t k = m; k <= n; ++k)
    for (auto i : a.coords) c.push_back(i + k);
  return cylinder_partition(std::move(c), a.alphabet);
}

struct BlockEntropyOptions {
  long monteCarloSamples = 200000;
  std::uint64_t seed = 1;
};

/// (1/n) H(alpha_0^{n-1}): full word enumeration inside the atom budget,
/// plug-in word frequencies (with standard error) beyond it.
inline EntropyEstimate block_entropy_rate(const MeasureOracle& o, const FinitePartition& alpha, int n,
                                          BlockEntropyOptions opt = {}) {
  require(n >= 1, ErrorKind::InvalidArgument, "block length must be >= 1");
  const auto join = dynamical_join(alpha, 0, n - 1);
  const auto L = coord_law(o, join.cylinder()->coords);
  EntropyEstimate e;
  e.nUsed = n;
  if (atom_count(join) <= kAtomBudget) {
    CompensatedSum h;
    enumerate_words(L, [&](const std::vector<std::uint8_t>&, double p) { h.add(-p * std::log(p)); });
    e.value = h.value() / n;
    return e;
  }
  e.mode = EstimateMode::MonteCarlo;
  e.sampleCount = opt.monteCarloSamples;
  std::map<std::vector<std::uint8_t>, long> freq;
  std::vector<std::vector<std::uint8_t>> draws;
  Rng rng(opt.seed);
  for (long s = 0; s < opt.monteCarloSamples; ++s) draws.push_back(sample_word(L, rng));
  for (const auto& w : draws) ++freq[w];
  const double M = double(opt.monteCarloSamples);
  double s1 = 0.0, s2 = 0.0;
  for (const auto& w : draws) {
    const double v = -std::log(double(freq[w]) / M);
    s1 += v;
    s2 += v * v;
  }
  const double mean = s1 / M;
  e.value = mean / n;
  e.stderr_ = std::sqrt(std::max(0.0, s2 / M - mean * mean) / M) / n;
  return e;
}

// ---------------------------------------------------------------------------
// Brin-Katok local entropy

struct BrinKatokMode {
  enum Kind { ExactCylinder, MonteCarlo } kind = ExactCylinder;
  long sampleCount = 0;
};

struct BrinKatokLevel {
  double eps = 0.0;
  std::vector<double> values;  // -log mu(B_n(x, eps)) / n per n
  std::vector<long> hits;      // MonteCarlo only
  bool reliable = true;
  double lower = 0.0, upper = 0.0;  // min / max over the trailing half of the n schedule
  double slope = 0.0;               // least squares slope of -log mu(B_n) against n on the trailing half
};

struct BrinKatokResult {
  EntropyEstimate lower, upper;
  double slope = 0.0;
  double chosenEps = 0.0;
  std::vector<BrinKatokLevel> levels;
  static constexpr long kHitFloor = 50;
};

namespace detail {

inline std::size_t trailing_start(std::size_t n) { return n / 2; }

inline void summarize(BrinKatokLevel& lv, const std::vector<int>& ns) {
  const std::size_t s = trailing_start(ns.size());
  lv.lower = std::numeric_limits<double>::infinity();
  lv.upper = -std::numeric_limits<double>::infinity();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = double(ns.size() - s);
  for (std::size_t j = s; j < ns.size(); ++j) {
    lv.lower = std::min(lv.lower, lv.values[j]);
    lv.upper = std::max(lv.upper, lv.values[j]);
    const double X = ns[j], Y = lv.values[j] * ns[j];
    sx += X;
    sy += Y;
    sxx += X * X;
    sxy += X * Y;
  }
  const double den = m * sxx - sx * sx;
  lv.slope = den > 0 ? (m * sxy - sx * sy) / den : lv.values.back();
}

/// Largest K with 2^-K >= eps: the dyadic ball B(x, eps) fixes |i| <= K.
inline int dyadic_radius_index(double eps) { return int(std::floor(-std::log2(eps))); }

}  // namespace detail

inline BrinKatokResult brin_katok_local(const SystemDescriptor& sys, const MeasureOracle& o, const Point& x,
                                        const std::vector<double>& epsSchedule, const std::vector<int>& nSchedule,
                                        BrinKatokMode mode, std::uint64_t seed, int threads = 1) {
  require(!epsSchedule.empty() && !nSchedule.empty(), ErrorKind::EmptySchedule, "empty eps or n schedule");
  for (std::size_t i = 1; i < epsSchedule.size(); ++i)
    require(epsSchedule[i] < epsSchedule[i - 1], ErrorKind::InvalidArgument, "eps schedule must be decreasing");
  for (std::size_t i = 1; i < nSchedule.size(); ++i)
    require(nSchedule[i] > nSchedule[i - 1], ErrorKind::InvalidArgument, "n schedule must be increasing");
  require(nSchedule.front() >= 1, ErrorKind::InvalidArgument, "n must be >= 1");

  BrinKatokResult res;
  const std::size_t J = nSchedule.size();
  if (mode.kind == BrinKatokMode::ExactCylinder) {
    const auto* f = as_shift(sys);
    require(f && f->dyadic() && !f->reversed, ErrorKind::UnsupportedSystem,
            "exact-cylinder mode needs the dyadic left shift");
    require(alphabet_of(o) > 0, ErrorKind::UnsupportedOracle, "exact-cylinder mode needs a symbolic oracle");
    const auto& xs = x.symbolic();
    for (double eps : epsSchedule) {
      BrinKatokLevel lv;
      lv.eps = eps;
      const int K = detail::dyadic_radius_index(eps);
      for (int n : nSchedule) {
        std::vector<std::int64_t> c;
        std::vector<std::uint8_t> w;
        for (std::int64_t i = -K; i <= n - 1 + K; ++i) {
          c.push_back(i);
          w.push_back(xs.at(i));
        }
        const double lm = coords_log_measure(o, c, w);
        if (!std::isfinite(lm)) fail(ErrorKind::ZeroMassAtom, "x lies in a null cylinder");
        lv.values.push_back(-lm / n);
      }
      detail::summarize(lv, nSchedule);
      res.levels.push_back(std::move(lv));
    }
  } else {
    require(mode.sampleCount > 0, ErrorKind::InvalidArgument, "Monte Carlo mode needs a sample count");
    const int nMax = nSchedule.back();
    const std::size_t E = epsSchedule.size();
    // for each sample y: reach_k = max_{j<k} d(T^j x, T^j y); y in B_n(x, eps) iff reach_n < eps
    constexpr std::size_t kChunks = 64;
    std::vector<std::vector<long>> hits(kChunks, std::vector<long>(E * J, 0));
    std::vector<Point> orbit{x};
    for (int k = 1; k < nMax; ++k) orbit.push_back(iterate(sys, orbit.back(), 1));
    const long S = mode.sampleCount;
    parallel_for(kChunks, threads, [&](std::size_t ch) {
      const long lo = S * long(ch) / long(kChunks), hi = S * long(ch + 1) / long(kChunks);
      auto& h = hits[ch];
      for (long s = lo; s < hi; ++s) {
        Point y = sample_point(sys, o, derive_seed(seed, std::uint64_t(s)));
        double reach = 0.0;
        std::size_t j = 0;
        for (int k = 0; k < nMax && j < J; ++k) {
          if (k > 0) y = iterate(sys, y, 1);
          const auto d = distance_detail(sys, orbit[std::size_t(k)], y);
          reach = std::max(reach, d.upper());
          if (reach >= epsSchedule.front()) break;
          while (j < J && nSchedule[j] == k + 1) {
            for (std::size_t e = 0; e < E; ++e)
              if (reach < epsSchedule[e]) ++h[e * J + j];
            ++j;
          }
        }
      }
    });
    for (std::size_t e = 0; e < E; ++e) {
      BrinKatokLevel lv;
      lv.eps = epsSchedule[e];
      for (std::size_t j = 0; j < J; ++j) {
        long t = 0;
        for (const auto& h : hits) t += h[e * J + j];
        lv.hits.push_back(t);
        if (t < BrinKatokResult::kHitFloor) lv.reliable = false;
        lv.values.push_back(t > 0 ? -std::log(double(t) / double(S)) / nSchedule[j]
                                  : std::numeric_limits<double>::infinity());
      }
      detail::summarize(lv, nSchedule);
      res.levels.push_back(std::move(lv));
    }
  }

  const BrinKatokLevel* pick = nullptr;
  for (const auto& lv : res.levels)
    if (lv.reliable) pick = &lv;  // schedule is decreasing: last reliable is the smallest eps
  if (!pick)
    fail(ErrorKind::HitStarvation, "no eps level reached " + std::to_string(BrinKatokResult::kHitFloor) +
                                       " hits at every n");
  const auto em = mode.kind == BrinKatokMode::ExactCylinder ? EstimateMode::Exact : EstimateMode::MonteCarlo;
  res.chosenEps = pick->eps;
  res.slope = pick->slope;
  double se = 0.0;  // delta method: sd(-log p_hat) ~ sqrt((1-p)/hits)
  for (std::size_t j = detail::trailing_start(J); j < pick->hits.size(); ++j) {
    const double t = double(pick->hits[j]);
    se = std::max(se, std::sqrt(std::max(0.0, 1.0 - t / double(mode.sampleCount)) / t) / nSchedule[j]);
  }
  res.lower = {pick->lower, em, nSchedule.back(), mode.sampleCount, se};
  res.upper = {pick->upper, em, nSchedule.back(), mode.sampleCount, se};
  for (const auto& lv : res.levels)
    if (lv.lower > lv.upper) fail(ErrorKind::TaskFailed, "lower proxy exceeds upper proxy");
  return res;
}

}  // namespace ergokit
