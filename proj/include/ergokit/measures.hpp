#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "ergokit/error.hpp"
#include "ergokit/random.hpp"
#include "ergokit/systems.hpp"

namespace ergokit {

struct LebesgueTorus {};

struct BernoulliIID {
  std::vector<double> p;
};

struct MarkovStationary {
  std::vector<std::vector<double>> P;
  std::vector<double> pi;
};

/// Markov or Bernoulli law conditioned on the block x_{-P..0}; the output of
/// disintegrate_past. Coordinates below -P are not evaluable (sampling fills
/// them with the time-reversed chain).
struct ConditionedPast;

struct MeasureOracle;
using OraclePtr = std::shared_ptr<const MeasureOracle>;

struct ProductMeasure {
  OraclePtr left;
  OraclePtr right;
};

struct ConditionedPast {
  OraclePtr base;  // BernoulliIID or MarkovStationary
  int depth = 0;   // block covers -depth..0
  std::vector<std::uint8_t> block;
};

struct MeasureOracle {
  std::variant<LebesgueTorus, BernoulliIID, MarkovStationary, ProductMeasure, ConditionedPast> v;
};

inline OraclePtr make_oracle(MeasureOracle o) { return std::make_shared<const MeasureOracle>(std::move(o)); }

constexpr double kStochTol = 1e-12;

namespace detail {

inline Eigen::MatrixXd to_matrix(const std::vector<std::vector<double>>& P) {
  const auto m = static_cast<Eigen::Index>(P.size());
  Eigen::MatrixXd M(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < m; ++j) M(i, j) = P[std::size_t(i)][std::size_t(j)];
  return M;
}

inline double residual(const std::vector<std::vector<double>>& P, const std::vector<double>& pi) {
  double worst = 0.0;
  for (std::size_t j = 0; j < pi.size(); ++j) {
    double s = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) s += pi[i] * P[i][j];
    worst = std::max(worst, std::fabs(s - pi[j]));
  }
  return worst;
}

}  // namespace detail

inline BernoulliIID bernoulli(std::vector<double> p) {
  require(p.size() >= 2, ErrorKind::InvalidArgument, "probability vector needs at least two entries");
  double s = 0.0;
  for (double v : p) {
    require(v >= 0.0, ErrorKind::InvalidArgument, "negative probability");
    s += v;
  }
  require(std::fabs(s - 1.0) < kStochTol, ErrorKind::InvalidArgument, "probabilities must sum to 1");
  return {std::move(p)};
}

/// Builds the stationary oracle. pi is solved from (P^T - I) pi = 0, sum pi = 1
/// when not supplied; a supplied pi is checked. Reducible chains with several
/// stationary laws require an explicit pi.
inline MarkovStationary markov(std::vector<std::vector<double>> P, std::optional<std::vector<double>> pi = {}) {
  const std::size_t m = P.size();
  require(m >= 2, ErrorKind::InvalidArgument, "transition matrix needs at least two states");
  for (const auto& row : P) {
    require(row.size() == m, ErrorKind::InvalidArgument, "transition matrix must be square");
    double s = 0.0;
    for (double v : row) {
      require(v >= 0.0, ErrorKind::InvalidArgument, "negative transition probability");
      s += v;
    }
    require(std::fabs(s - 1.0) < kStochTol, ErrorKind::InvalidArgument, "transition rows must sum to 1");
  }
  std::vector<double> st;
  if (pi) {
    st = *pi;
    require(st.size() == m, ErrorKind::InvalidArgument, "stationary vector has wrong length");
  } else {
    const Eigen::MatrixXd M = detail::to_matrix(P);
    const auto mi = static_cast<Eigen::Index>(m);
    Eigen::MatrixXd A = M.transpose() - Eigen::MatrixXd::Identity(mi, mi);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    require(lu.rank() == mi - 1, ErrorKind::InvalidArgument,
            "stationary vector is not unique; supply pi explicitly");
    Eigen::MatrixXd B(mi + 1, mi);
    B << A, Eigen::RowVectorXd::Ones(mi);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(mi + 1);
    rhs(mi) = 1.0;
    Eigen::VectorXd sol = B.colPivHouseholderQr().solve(rhs);
    st.assign(sol.data(), sol.data() + mi);
    for (double& v : st) v = std::max(v, 0.0);
  }
  double s = 0.0;
  for (double v : st) s += v;
  require(std::fabs(s - 1.0) < 1e-9, ErrorKind::InvalidArgument, "stationary vector must sum to 1");
  require(detail::residual(P, st) < kStochTol, ErrorKind::InvalidArgument, "pi P != pi within 1e-12");
  return {std::move(P), std::move(st)};
}

inline MeasureOracle product_measure(MeasureOracle l, MeasureOracle r) {
  return {ProductMeasure{make_oracle(std::move(l)), make_oracle(std::move(r))}};
}

/// Number of symbols an oracle speaks; 0 for non-symbolic oracles.
inline int alphabet_of(const MeasureOracle& o) {
  if (auto* b = std::get_if<BernoulliIID>(&o.v)) return int(b->p.size());
  if (auto* m = std::get_if<MarkovStationary>(&o.v)) return int(m->pi.size());
  if (auto* c = std::get_if<ConditionedPast>(&o.v)) return alphabet_of(*c->base);
  return 0;
}

// ---------------------------------------------------------------------------
// Exact cylinder measures

namespace detail {

/// P^g with a small cache; gaps in cylinder windows are short but pasts can be long.
class PowerCache {
 public:
  explicit PowerCache(const std::vector<std::vector<double>>& P) : P_(to_matrix(P)) {}
  const Eigen::MatrixXd& get(std::int64_t g) {
    auto it = cache_.find(g);
    if (it != cache_.end()) return it->second;
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(P_.rows(), P_.cols());
    Eigen::MatrixXd B = P_;
    for (std::int64_t e = g; e > 0; e >>= 1) {
      if (e & 1) R = R * B;
      B = B * B;
    }
    return cache_.emplace(g, std::move(R)).first->second;
  }

 private:
  Eigen::MatrixXd P_;
  std::map<std::int64_t, Eigen::MatrixXd> cache_;
};

inline double safe_log(double v) { return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity(); }

inline double markov_chain_log(const MarkovStationary& m, std::span<const std::int64_t> coords,
                               std::span<const std::uint8_t> sym) {
  PowerCache pc(m.P);
  double lp = safe_log(m.pi[sym[0]]);
  for (std::size_t j = 1; j < coords.size(); ++j) {
    const std::int64_t g = coords[j] - coords[j - 1];
    const double t = g == 1 ? m.P[sym[j - 1]][sym[j]] : pc.get(g)(sym[j - 1], sym[j]);
    lp += safe_log(t);
  }
  return lp;
}

}  // namespace detail

/// log mu{z : z_{coords[j]} = sym[j] for all j}. coords must be strictly increasing.
inline double coords_log_measure(const MeasureOracle& o, std::span<const std::int64_t> coords,
                                 std::span<const std::uint8_t> sym) {
  require(coords.size() == sym.size(), ErrorKind::LengthMismatch, "coordinate and symbol lists differ in length");
  for (std::size_t j = 1; j < coords.size(); ++j)
    require(coords[j] > coords[j - 1], ErrorKind::InvalidArgument, "coordinates must be strictly increasing");
  const int a = alphabet_of(o);
  for (auto s : sym) require(s < a || a == 0, ErrorKind::InvalidArgument, "symbol outside the alphabet");
  if (coords.empty()) {
    require(a > 0, ErrorKind::UnsupportedOracle, "oracle has no cylinder measures");
    return 0.0;
  }
  if (auto* b = std::get_if<BernoulliIID>(&o.v)) {
    double lp = 0.0;
    for (auto s : sym) lp += detail::safe_log(b->p[s]);
    return lp;
  }
  if (auto* m = std::get_if<MarkovStationary>(&o.v)) return detail::markov_chain_log(*m, coords, sym);
  if (auto* c = std::get_if<ConditionedPast>(&o.v)) {
    // Fixed block: consistency check; future: chain restarted at x_0.
    std::vector<std::int64_t> fc{0};
    std::vector<std::uint8_t> fs{c->block[std::size_t(c->depth)]};
    for (std::size_t j = 0; j < coords.size(); ++j) {
      if (coords[j] < -c->depth)
        fail(ErrorKind::UnsupportedOracle, "conditional measure is only evaluable on coordinates >= -depth");
      if (coords[j] <= 0) {
        if (c->block[std::size_t(coords[j] + c->depth)] != sym[j]) return -std::numeric_limits<double>::infinity();
      } else {
        fc.push_back(coords[j]);
        fs.push_back(sym[j]);
      }
    }
    if (fc.size() == 1) return 0.0;
    if (auto* b = std::get_if<BernoulliIID>(&c->base->v)) {
      double lp = 0.0;
      for (std::size_t j = 1; j < fs.size(); ++j) lp += detail::safe_log(b->p[fs[j]]);
      return lp;
    }
    const auto& mk = std::get<MarkovStationary>(c->base->v);
    // drop the pi factor of the starting state: condition on x_0
    return detail::markov_chain_log(mk, fc, fs) - detail::safe_log(mk.pi[fs[0]]);
  }
  fail(ErrorKind::UnsupportedOracle, "oracle has no exact cylinder measures");
}

inline double cylinder_measure(const MeasureOracle& o, std::span<const std::uint8_t> word, std::int64_t start) {
  // direct products for the unconditioned laws: sums over all words then add to 1 to rounding
  const int a = alphabet_of(o);
  for (auto s : word) require(s < a || a == 0, ErrorKind::InvalidArgument, "symbol outside the alphabet");
  if (auto* b = std::get_if<BernoulliIID>(&o.v)) {
    double m = 1.0;
    for (auto s : word) m *= b->p[s];
    return m;
  }
  if (auto* mk = std::get_if<MarkovStationary>(&o.v)) {
    if (word.empty()) return 1.0;
    double m = mk->pi[word[0]];
    for (std::size_t i = 1; i < word.size(); ++i) m *= mk->P[word[i - 1]][word[i]];
    return m;
  }
  std::vector<std::int64_t> coords(word.size());
  for (std::size_t i = 0; i < word.size(); ++i) coords[i] = start + std::int64_t(i);
  return std::exp(coords_log_measure(o, coords, word));
}

// ---------------------------------------------------------------------------
// Closed forms

inline double shannon(std::span<const double> p) {
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h;
}

/// Kolmogorov-Sinai entropy of the shift under the oracle (nats).
inline double entropy_rate(const MeasureOracle& o) {
  if (auto* b = std::get_if<BernoulliIID>(&o.v)) return shannon(b->p);
  if (auto* m = std::get_if<MarkovStationary>(&o.v)) {
    double h = 0.0;
    for (std::size_t i = 0; i < m->pi.size(); ++i) h += m->pi[i] * shannon(m->P[i]);
    return h;
  }
  if (auto* p = std::get_if<ProductMeasure>(&o.v)) return entropy_rate(*p->left) + entropy_rate(*p->right);
  fail(ErrorKind::UnsupportedOracle, "no closed-form entropy rate for this oracle");
}

/// Entropy of the time-0 marginal.
inline double marginal_entropy(const MeasureOracle& o) {
  if (auto* b = std::get_if<BernoulliIID>(&o.v)) return shannon(b->p);
  if (auto* m = std::get_if<MarkovStationary>(&o.v)) return shannon(m->pi);
  fail(ErrorKind::UnsupportedOracle, "marginal entropy needs a symbolic oracle");
}

// ---------------------------------------------------------------------------
// Sampling

namespace detail {

inline std::vector<double> reversed_row(const MarkovStationary& m, std::uint8_t next) {
  // P(x_{t-1} = i | x_t = j) = pi_i P_ij / pi_j
  std::vector<double> r(m.pi.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = m.pi[i] * m.P[i][next] / m.pi[next];
  return r;
}

inline std::vector<std::uint8_t> sample_symbols(const MeasureOracle& o, int window, std::uint64_t seed) {
  const std::size_t len = std::size_t(2 * window + 1);
  std::vector<std::uint8_t> s(len);
  if (auto* b = std::get_if<BernoulliIID>(&o.v)) {
    for (std::size_t k = 0; k < len; ++k)
      s[k] = std::uint8_t(draw_index(b->p, counter_uniform(seed, std::int64_t(k) - window)));
    return s;
  }
  if (auto* m = std::get_if<MarkovStationary>(&o.v)) {
    Rng rng(seed);
    s[0] = std::uint8_t(draw_index(m->pi, rng.uniform()));
    for (std::size_t k = 1; k < len; ++k) s[k] = std::uint8_t(draw_index(m->P[s[k - 1]], rng.uniform()));
    return s;
  }
  if (auto* c = std::get_if<ConditionedPast>(&o.v)) {
    require(c->depth <= window, ErrorKind::WindowExhausted, "conditioning block longer than the window");
    Rng rng(seed);
    const std::size_t z = std::size_t(window);
    for (int i = 0; i <= c->depth; ++i) s[z - std::size_t(c->depth) + std::size_t(i)] = c->block[std::size_t(i)];
    if (auto* b = std::get_if<BernoulliIID>(&c->base->v)) {
      for (std::size_t k = 0; k < len; ++k) {
        if (k + std::size_t(c->depth) >= z && k <= z) continue;
        s[k] = std::uint8_t(draw_index(b->p, counter_uniform(seed, std::int64_t(k) - window)));
      }
      return s;
    }
    const auto& mk = std::get<MarkovStationary>(c->base->v);
    for (std::size_t k = z + 1; k < len; ++k) s[k] = std::uint8_t(draw_index(mk.P[s[k - 1]], rng.uniform()));
    for (std::size_t k = z - std::size_t(c->depth); k-- > 0;)
      s[k] = std::uint8_t(draw_index(reversed_row(mk, s[k + 1]), rng.uniform()));
    return s;
  }
  fail(ErrorKind::IncompatibleOracle, "oracle cannot produce symbol sequences");
}

}  // namespace detail

/// Draw from the oracle; a pure function of (system, oracle, seed).
inline Point sample_point(const SystemDescriptor& sys, const MeasureOracle& o, std::uint64_t seed) {
  if (is_torus(sys)) {
    require(std::holds_alternative<LebesgueTorus>(o.v), ErrorKind::IncompatibleOracle, "torus needs LebesgueTorus");
    Rng rng(seed);
    TorusPoint p;
    p.X = rng.next();
    p.Y = rng.next();
    return {p};
  }
  if (auto* f = as_shift(sys)) {
    const int a = alphabet_of(o);
    require(a == f->alphabet, ErrorKind::IncompatibleOracle,
            "oracle alphabet " + std::to_string(a) + " does not match shift alphabet " + std::to_string(f->alphabet));
    return {SymbolicPoint::from(detail::sample_symbols(o, f->window, seed))};
  }
  const auto& ps = std::get<ProductSystem>(sys.v);
  auto* pm = std::get_if<ProductMeasure>(&o.v);
  require(pm != nullptr, ErrorKind::IncompatibleOracle, "product system needs a product measure");
  return make_product_point(sample_point(*ps.left, *pm->left, derive_seed(seed, 0)),
                            sample_point(*ps.right, *pm->right, derive_seed(seed, 1)));
}

}  // namespace ergokit
