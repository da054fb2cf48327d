#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "ergokit/error.hpp"
#include "ergokit/systems.hpp"

namespace ergokit {

constexpr std::uint64_t kAtomBudget = std::uint64_t(1) << 24;

/// Atoms are the words on a finite coordinate set. Empty set = trivial partition.
struct CylinderCoords {
  std::vector<std::int64_t> coords;  // sorted, unique
  int alphabet = 2;
};

/// m x m half-open grid boxes on the torus.
struct TorusGrid {
  int m = 1;
};

struct FinitePartition;
using PartitionPtr = std::shared_ptr<const FinitePartition>;

struct ProductPartition {
  PartitionPtr left;
  PartitionPtr right;
};

struct FinitePartition {
  std::variant<CylinderCoords, TorusGrid, ProductPartition> v;

  const CylinderCoords* cylinder() const { return std::get_if<CylinderCoords>(&v); }
};

inline FinitePartition cylinder_partition(std::vector<std::int64_t> coords, int alphabet = 2) {
  std::sort(coords.begin(), coords.end());
  coords.erase(std::unique(coords.begin(), coords.end()), coords.end());
  return {CylinderCoords{std::move(coords), alphabet}};
}

/// Cylinder partition on the window lo..hi.
inline FinitePartition window_partition(std::int64_t lo, std::int64_t hi, int alphabet = 2) {
  std::vector<std::int64_t> c;
  for (std::int64_t i = lo; i <= hi; ++i) c.push_back(i);
  return {CylinderCoords{std::move(c), alphabet}};
}

inline FinitePartition trivial_partition(int alphabet = 2) { return {CylinderCoords{{}, alphabet}}; }

/// Number of atoms, saturating at UINT64_MAX.
inline std::uint64_t atom_count(const FinitePartition& p) {
  auto mul = [](std::uint64_t a, std::uint64_t b) {
    return (b != 0 && a > std::numeric_limits<std::uint64_t>::max() / b) ? std::numeric_limits<std::uint64_t>::max()
                                                                        : a * b;
  };
  if (auto* c = p.cylinder()) {
    std::uint64_t n = 1;
    for (std::size_t i = 0; i < c->coords.size(); ++i) n = mul(n, std::uint64_t(c->alphabet));
    return n;
  }
  if (auto* g = std::get_if<TorusGrid>(&p.v)) return std::uint64_t(g->m) * std::uint64_t(g->m);
  const auto& pp = std::get<ProductPartition>(p.v);
  return mul(atom_count(*pp.left), atom_count(*pp.right));
}

inline FinitePartition refine(const FinitePartition& a, const FinitePartition& b) {
  if (a.v.index() != b.v.index()) fail(ErrorKind::InvalidArgument, "cannot refine partitions of different kinds");
  FinitePartition out;
  if (auto* ca = a.cylinder()) {
    const auto& cb = *b.cylinder();
    require(ca->alphabet == cb.alphabet, ErrorKind::InvalidArgument, "alphabet sizes differ");
    std::vector<std::int64_t> u;
    std::set_union(ca->coords.begin(), ca->coords.end(), cb.coords.begin(), cb.coords.end(), std::back_inserter(u));
    out = {CylinderCoords{std::move(u), ca->alphabet}};
  } else if (auto* ga = std::get_if<TorusGrid>(&a.v)) {
    const int mb = std::get<TorusGrid>(b.v).m;
    require(mb % ga->m == 0 || ga->m % mb == 0, ErrorKind::InvalidArgument,
            "join of non-nested grids is not a grid");
    out = {TorusGrid{std::max(ga->m, mb)}};
  } else {
    const auto& pa = std::get<ProductPartition>(a.v);
    const auto& pb = std::get<ProductPartition>(b.v);
    out = {ProductPartition{std::make_shared<const FinitePartition>(refine(*pa.left, *pb.left)),
                            std::make_shared<const FinitePartition>(refine(*pa.right, *pb.right))}};
  }
  require(atom_count(out) <= kAtomBudget, ErrorKind::AtomBudgetExceeded, "refinement exceeds the atom budget");
  return out;
}

/// T^{-k} a. For the left shift a cylinder on S becomes a cylinder on S + k.
inline FinitePartition pullback(const FinitePartition& a, std::int64_t k) {
  if (auto* c = a.cylinder()) {
    CylinderCoords r = *c;
    for (auto& i : r.coords) i += k;
    return {r};
  }
  if (k == 0) return a;
  if (auto* p = std::get_if<ProductPartition>(&a.v))
    return {ProductPartition{std::make_shared<const FinitePartition>(pullback(*p->left, k)),
                             std::make_shared<const FinitePartition>(pullback(*p->right, k))}};
  fail(ErrorKind::UnsupportedSystem, "pullback of a torus grid is not a grid");
}

/// Pullback that also checks the shifted coordinates still fit the window.
inline FinitePartition pullback(const FinitePartition& a, std::int64_t k, int window) {
  auto r = pullback(a, k);
  if (auto* c = r.cylinder(); c && !c->coords.empty())
    require(std::llabs(c->coords.front()) <= window && std::llabs(c->coords.back()) <= window,
            ErrorKind::WindowExhausted, "pulled-back cylinder leaves the window");
  return r;
}

/// a is finer than or equal to b.
inline bool refines(const FinitePartition& a, const FinitePartition& b) {
  if (a.v.index() != b.v.index()) return false;
  if (auto* ca = a.cylinder())
    return std::includes(ca->coords.begin(), ca->coords.end(), b.cylinder()->coords.begin(),
                         b.cylinder()->coords.end());
  if (auto* ga = std::get_if<TorusGrid>(&a.v)) return ga->m % std::get<TorusGrid>(b.v).m == 0;
  const auto& pa = std::get<ProductPartition>(a.v);
  const auto& pb = std::get<ProductPartition>(b.v);
  return refines(*pa.left, *pb.left) && refines(*pa.right, *pb.right);
}

/// Symbols of x on the partition's coordinates (cylinder partitions only).
inline std::vector<std::uint8_t> word_of(const CylinderCoords& c, const SymbolicPoint& x) {
  std::vector<std::uint8_t> w(c.coords.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = x.at(c.coords[i]);
  return w;
}

/// Atom id of x. Cylinder labels are base-alphabet numbers and need <= 64 bits of room.
inline std::uint64_t label(const FinitePartition& p, const Point& x) {
  if (auto* c = p.cylinder()) {
    require(atom_count(p) < std::numeric_limits<std::uint64_t>::max(), ErrorKind::AtomBudgetExceeded,
            "too many atoms to label");
    std::uint64_t id = 0;
    for (auto i : c->coords) id = id * std::uint64_t(c->alphabet) + x.symbolic().at(i);
    return id;
  }
  if (auto* g = std::get_if<TorusGrid>(&p.v)) {
    const auto& t = x.torus();
    auto cell = [&](double v) { return std::min<std::uint64_t>(std::uint64_t(v * g->m), std::uint64_t(g->m - 1)); };
    return cell(t.x()) * std::uint64_t(g->m) + cell(t.y());
  }
  const auto& pp = std::get<ProductPartition>(p.v);
  return label(*pp.left, *x.pair().left) * atom_count(*pp.right) + label(*pp.right, *x.pair().right);
}

/// Largest atom diameter under the system's metric.
///   dyadic: 2^{-k0}, k0 = min{|i| : i not fixed};
///   weighted: (alphabet-1) sqrt(sum of a_|i| over free i);
///   grid: sqrt(2)/m (or the torus diameter for m = 1).
inline double diameter_bound(const FinitePartition& p, const SystemDescriptor& sys) {
  if (auto* c = p.cylinder()) {
    const auto* f = as_shift(sys);
    require(f != nullptr, ErrorKind::UnsupportedSystem, "cylinder partition needs a shift");
    auto fixed = [&](std::int64_t i) { return std::binary_search(c->coords.begin(), c->coords.end(), i); };
    if (f->dyadic()) {
      std::int64_t k0 = 0;
      while (fixed(k0) && fixed(-k0)) ++k0;
      return std::ldexp(1.0, -int(k0));
    }
    const auto& w = std::get<WeightedL2Metric>(f->metric).weights;
    // free coordinates: everything outside the set, summed exactly over the set's span
    const std::int64_t span = c->coords.empty() ? 0 : std::max(std::llabs(c->coords.front()), std::llabs(c->coords.back()));
    double s = w.tail_sum(span + 1) * 2.0;
    for (std::int64_t i = -span; i <= span; ++i)
      if (!fixed(i)) s += w.a(i);
    return double(f->alphabet - 1) * std::sqrt(s);
  }
  if (auto* g = std::get_if<TorusGrid>(&p.v)) return g->m == 1 ? std::sqrt(0.5) : std::sqrt(2.0) / g->m;
  const auto& pp = std::get<ProductPartition>(p.v);
  const auto& ps = std::get<ProductSystem>(sys.v);
  return std::max(diameter_bound(*pp.left, *ps.left), diameter_bound(*pp.right, *ps.right));
}

}  // namespace ergokit
