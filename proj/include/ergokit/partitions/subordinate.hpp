#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "ergokit/entropy.hpp"
#include "ergokit/error.hpp"
#include "ergokit/parallel.hpp"
#include "ergokit/partitions/lattice.hpp"

namespace ergokit {

/// Image partition T^k a = {T^k A}. On the left shift a cylinder on S maps to S - k.
inline FinitePartition image(const FinitePartition& a, std::int64_t k) { return pullback(a, -k); }

/// a^- truncated at depth P: join of T^j a for j = 1..P.
inline FinitePartition past(const FinitePartition& a, int P) {
  const auto& c = *a.cylinder();
  std::vector<std::int64_t> coords;
  for (int j = 1; j <= P; ++j)
    for (auto i : c.coords) coords.push_back(i - j);
  return cylinder_partition(std::move(coords), c.alphabet);
}

/// beta_p = cylinder on [-p+1, p], p = 1..Q.
inline std::vector<FinitePartition> default_beta_chain(int Q, int alphabet = 2) {
  std::vector<FinitePartition> b;
  for (int p = 1; p <= Q; ++p) b.push_back(window_partition(-p + 1, p, alphabet));
  return b;
}

struct InequalityResidual {
  int q = 0, p = 0;
  double lhs = 0.0;  // H(alpha_p | alpha_{q-1}^-) - H(alpha_p | alpha_q^-), depth-P proxies
  double rhs = 0.0;  // 1 / (p 2^{q-p})
};

struct SubordinatePlan {
  double delta = 0.0;
  std::vector<FinitePartition> betas;
  std::vector<int> ks;
  std::vector<FinitePartition> alphas;
  int depth = 0;      // Q
  int pastDepth = 0;  // P
  double tol = 0.1;
  std::vector<InequalityResidual> residuals;
  std::vector<std::vector<double>> searchCurves;  // per q >= 2: max_p lhs/rhs for k = 0..kMax tried
  std::vector<double> cP, cHalfP;                 // H(alpha_p | alpha_Q^-) at depth P and P/2
  std::vector<double> hAlpha;                     // H(alpha_p | alpha_p^-) at depth P
  double supC = 0.0;
  double entropyTarget = 0.0;  // closed-form h_mu(T)
  double gapToH = 0.0;
};

struct SubordinateOptions {
  int kMax = 16;
  double tol = 0.1;  // margin as a fraction of the right-hand side
  int threads = 1;
};

namespace detail {

inline double cond_h(const FinitePartition& a, const FinitePartition& c, const MeasureOracle& o) {
  return conditional_entropy(a, c, o).value;
}

inline FinitePartition join_alpha(const std::vector<FinitePartition>& betas, const std::vector<int>& ks,
                                  std::size_t q) {
  FinitePartition a = image(betas[0], ks[0]);
  for (std::size_t p = 1; p < q; ++p) {
    const auto& ca = *a.cylinder();
    const auto b = image(betas[p], ks[p]);
    std::vector<std::int64_t> u;
    std::set_union(ca.coords.begin(), ca.coords.end(), b.cylinder()->coords.begin(), b.cylinder()->coords.end(),
                   std::back_inserter(u));
    a = {CylinderCoords{std::move(u), ca.alphabet}};
  }
  return a;
}

}  // namespace detail

/// Chooses k_2..k_Q, each the least k in [0, kMax] for which the depth-P proxy of
/// H(alpha_p | alpha_{q-1}^-) - H(alpha_p | alpha_q^-) < 1/(p 2^{q-p}) holds for all p < q
/// with margin tol.
inline SubordinatePlan construct_subordinate_partition(const SystemDescriptor& sys, const MeasureOracle& o,
                                                       double delta, std::vector<FinitePartition> betas, int Q,
                                                       int P, SubordinateOptions opt = {}) {
  const auto* f = as_shift(sys);
  require(f != nullptr && !f->reversed, ErrorKind::UnsupportedSystem, "construction is implemented for the left shift");
  require(Q >= 1 && P >= 1, ErrorKind::InvalidArgument, "depth Q and past depth P must be >= 1");
  require(int(betas.size()) >= Q, ErrorKind::InvalidArgument, "beta chain shorter than Q");
  betas.resize(std::size_t(Q));
  for (const auto& b : betas)
    require(b.cylinder() != nullptr, ErrorKind::UnsupportedSystem, "beta chain must be cylinder partitions");
  for (int p = 1; p < Q; ++p) {
    require(refines(betas[std::size_t(p)], betas[std::size_t(p - 1)]), ErrorKind::InvalidArgument,
            "beta chain must increase in refinement");
    require(diameter_bound(betas[std::size_t(p)], sys) <= diameter_bound(betas[std::size_t(p - 1)], sys),
            ErrorKind::InvalidArgument, "beta diameters must not grow along the chain");
  }
  require(diameter_bound(betas[0], sys) <= delta, ErrorKind::InvalidArgument, "diam(beta_1) exceeds delta");
  require(diameter_bound(image(betas[0], 1), sys) <= delta, ErrorKind::InvalidArgument,
          "diam(T beta_1) exceeds delta");

  SubordinatePlan plan;
  plan.delta = delta;
  plan.betas = betas;
  plan.depth = Q;
  plan.pastDepth = P;
  plan.tol = opt.tol;
  plan.ks = {0};
  plan.alphas = {detail::join_alpha(betas, plan.ks, 1)};

  for (int q = 2; q <= Q; ++q) {
    const auto prevPast = past(plan.alphas.back(), P);
    std::vector<double> base(std::size_t(q - 1));
    for (int p = 1; p < q; ++p) base[std::size_t(p - 1)] = detail::cond_h(plan.alphas[std::size_t(p - 1)], prevPast, o);

    const std::size_t K = std::size_t(opt.kMax) + 1;
    std::vector<std::vector<InequalityResidual>> trial(K);
    std::vector<double> worst(K, 0.0);
    parallel_for(K, opt.threads, [&](std::size_t k) {
      auto ks = plan.ks;
      ks.push_back(int(k));
      const auto aq = detail::join_alpha(betas, ks, std::size_t(q));
      const auto qp = past(aq, P);
      for (int p = 1; p < q; ++p) {
        InequalityResidual r;
        r.q = q;
        r.p = p;
        r.lhs = base[std::size_t(p - 1)] - detail::cond_h(plan.alphas[std::size_t(p - 1)], qp, o);
        r.rhs = 1.0 / (p * std::ldexp(1.0, q - p));
        worst[k] = std::max(worst[k], r.lhs / r.rhs);
        trial[k].push_back(r);
      }
    });
    plan.searchCurves.push_back(worst);
    std::size_t chosen = K;
    for (std::size_t k = 0; k < K; ++k)
      if (worst[k] < 1.0 - opt.tol) {
        chosen = k;
        break;
      }
    if (chosen == K) {
      std::string curve;
      for (double w : worst) curve += " " + std::to_string(w);
      fail(ErrorKind::SearchExhausted, "no k <= " + std::to_string(opt.kMax) + " satisfies the inequality at q=" +
                                           std::to_string(q) + "; max lhs/rhs per k:" + curve);
    }
    plan.ks.push_back(int(chosen));
    plan.alphas.push_back(detail::join_alpha(betas, plan.ks, std::size_t(q)));
    for (const auto& r : trial[chosen]) plan.residuals.push_back(r);
  }
  for (const auto& r : plan.residuals)
    if (!(r.lhs < (1.0 - opt.tol) * r.rhs)) fail(ErrorKind::TaskFailed, "returned ks violate the inequality proxy");

  const auto xiP = past(plan.alphas.back(), P);
  const auto xiHalf = past(plan.alphas.back(), std::max(1, P / 2));
  for (int p = 1; p <= Q; ++p) {
    const auto& ap = plan.alphas[std::size_t(p - 1)];
    plan.cP.push_back(detail::cond_h(ap, xiP, o));
    plan.cHalfP.push_back(detail::cond_h(ap, xiHalf, o));
    plan.hAlpha.push_back(detail::cond_h(ap, past(ap, P), o));
  }
  plan.supC = *std::max_element(plan.cP.begin(), plan.cP.end());
  plan.entropyTarget = entropy_rate(std::holds_alternative<ConditionedPast>(o.v)
                                        ? *std::get<ConditionedPast>(o.v).base
                                        : o);
  plan.gapToH = plan.entropyTarget - plan.supC;
  return plan;
}

// ---------------------------------------------------------------------------
// Atoms of xi = (alpha_Q)^- inside delta-unstable sets

struct AtomLevelCheck {
  int j = 0;
  double bound = 0.0;        // diam(beta_j)
  double maxObserved = 0.0;  // max over pairs and i of d(T^{-(k_j+i)} y, T^{-(k_j+i)} z)
  int violations = 0;
};

struct AtomCheckReport {
  double maxBackDiam = 0.0;  // max over pairs and 0 <= i <= horizon of d(T^{-i} y, T^{-i} z)
  int deltaViolations = 0;
  std::vector<AtomLevelCheck> perJ;
  std::int64_t fixedUpTo = 0;  // the atom fixes every coordinate <= this one
  bool holds() const {
    if (deltaViolations) return false;
    for (const auto& l : perJ)
      if (l.violations) return false;
    return true;
  }
};

/// Samples pairs in the atom of xi(x), xi = join_{n>=1} T^n alpha_Q, which fixes
/// every coordinate below max(S_Q) (S_Q the coordinates of alpha_Q), and
/// back-iterates them. Coordinates below the stored window are shared by
/// construction.
inline AtomCheckReport check_atom_in_unstable(const SystemDescriptor& sys, const SubordinatePlan& plan,
                                              const Point& x, int horizon, int samplePairs, std::uint64_t seed) {
  const auto* f = as_shift(sys);
  require(f != nullptr, ErrorKind::UnsupportedSystem, "atom check needs a shift");
  require(horizon >= 0 && samplePairs >= 1, ErrorKind::InvalidArgument, "need horizon >= 0 and pairs >= 1");
  const auto& cq = plan.alphas.back().cylinder()->coords;
  AtomCheckReport rep;
  rep.fixedUpTo = cq.empty() ? std::numeric_limits<std::int64_t>::min() : cq.back() - 1;
  int maxBack = horizon;
  for (std::size_t j = 0; j < plan.ks.size(); ++j) maxBack = std::max(maxBack, plan.ks[j] + horizon);
  require(maxBack <= f->window, ErrorKind::WindowExhausted, "horizon exceeds the window");
  for (std::size_t j = 0; j < plan.betas.size(); ++j)
    rep.perJ.push_back({int(j + 1), diameter_bound(plan.betas[j], sys), 0.0, 0});

  const auto& xs = x.symbolic();
  auto resample = [&](Rng& rng) {
    SymbolicPoint p = xs;
    auto data = *xs.data;
    for (std::int64_t i = std::max<std::int64_t>(rep.fixedUpTo + 1, xs.lo()); i <= xs.hi(); ++i)
      data[std::size_t(i + xs.shift + xs.window)] = std::uint8_t(rng.below(std::uint64_t(f->alphabet)));
    p.data = std::make_shared<const std::vector<std::uint8_t>>(std::move(data));
    return Point{p};
  };
  for (int s = 0; s < samplePairs; ++s) {
    Rng rng(derive_seed(seed, std::uint64_t(s)));
    const Point y = resample(rng), z = resample(rng);
    std::vector<double> back(std::size_t(maxBack) + 1);
    for (int i = 0; i <= maxBack; ++i) back[std::size_t(i)] = distance(sys, iterate(sys, y, -i), iterate(sys, z, -i));
    for (int i = 0; i <= horizon; ++i) {
      rep.maxBackDiam = std::max(rep.maxBackDiam, back[std::size_t(i)]);
      if (back[std::size_t(i)] > plan.delta) ++rep.deltaViolations;
    }
    for (std::size_t j = 0; j < rep.perJ.size(); ++j) {
      auto& l = rep.perJ[j];
      for (int i = 0; i <= horizon; ++i) {
        const double d = back[std::size_t(plan.ks[j] + i)];
        l.maxObserved = std::max(l.maxObserved, d);
        if (d > l.bound) ++l.violations;
      }
    }
  }
  return rep;
}

}  // namespace ergokit
