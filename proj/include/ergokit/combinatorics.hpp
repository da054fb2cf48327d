#pragma once

#include <cmath>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ergokit/error.hpp"

namespace ergokit {

/// rho_n(v, w): fraction of positions where the itineraries differ.
inline double hamming_pseudometric(std::span<const std::uint8_t> v, std::span<const std::uint8_t> w) {
  require(v.size() == w.size(), ErrorKind::LengthMismatch, "itineraries differ in length");
  require(!v.empty(), ErrorKind::InvalidArgument, "itineraries must be non-empty");
  std::size_t d = 0;
  for (std::size_t i = 0; i < v.size(); ++i) d += v[i] != w[i];
  return double(d) / double(v.size());
}

/// Delta = 2 sqrt(eps) log(a-1) - 2 sqrt(eps) log(2 sqrt(eps)) - (1 - 2 sqrt(eps)) log(1 - 2 sqrt(eps)), nats.
inline double delta_constant(double eps, int alphabet) {
  require(alphabet >= 2, ErrorKind::InvalidArgument, "alphabet size must be >= 2");
  const double r = 2.0 * std::sqrt(eps);
  if (!(eps > 0.0 && r < 1.0)) fail(ErrorKind::EpsOutOfRange, "need 0 < 2 sqrt(eps) < 1");
  return r * std::log(double(alphabet - 1)) - r * std::log(r) - (1.0 - r) * std::log1p(-r);
}

using Count = unsigned __int128;

inline std::string to_string(Count v) {
  if (v == 0) return "0";
  std::string s;
  for (; v; v /= 10) s.insert(s.begin(), char('0' + int(v % 10)));
  return s;
}

namespace detail {

inline Count binom(int n, int k) {
  if (k < 0 || k > n) return 0;
  Count c = 1;
  for (int i = 1; i <= k; ++i) c = c * Count(n - k + i) / Count(i);
  return c;
}

inline Count ipow(Count b, int e) {
  Count r = 1;
  for (int i = 0; i < e; ++i) r *= b;
  return r;
}

/// sum_{i <= top} C(n, i) (a - 1)^i
inline Count ball_sum(int n, int a, int top) {
  Count s = 0;
  for (int i = 0; i <= top && i <= n; ++i) s += binom(n, i) * ipow(Count(a - 1), i);
  return s;
}

}  // namespace detail

struct HammingBallReport {
  int n = 0, alphabet = 0, m = 0;  // m = ceil(2 n sqrt(eps))
  double eps = 0.0, delta = 0.0;
  Count exactCount = 0;     // words within rho_n < 2 sqrt(eps): radii i <= m - 1
  Count crudeLhs = 0;       // sum_{i <= m} C(n,i)(a-1)^i
  double paperCrudeBound = 0.0;  // m C(n,m) (a-1)^m
  double stirlingBound = 0.0;    // exp((Delta + eps) n)
  bool crudeHolds = false;
  bool stirlingHolds = false;
};

inline HammingBallReport hamming_ball_bound_check(int n, int alphabet, double eps) {
  require(n >= 1 && n <= 30, ErrorKind::InvalidArgument, "exact summation supports 1 <= n <= 30");
  require(alphabet >= 2 && alphabet <= 16, ErrorKind::InvalidArgument, "alphabet size must be in [2, 16]");
  HammingBallReport r;
  r.n = n;
  r.alphabet = alphabet;
  r.eps = eps;
  r.delta = delta_constant(eps, alphabet);
  const double radius = 2.0 * n * std::sqrt(eps);
  const double nearest = std::round(radius);
  // snap so that 2 n sqrt(eps) landing on an integer is treated as one
  r.m = std::fabs(radius - nearest) < 1e-9 ? int(nearest) : int(std::ceil(radius));
  r.exactCount = detail::ball_sum(n, alphabet, r.m - 1);
  r.crudeLhs = detail::ball_sum(n, alphabet, r.m);
  const Count crude = Count(r.m) * detail::binom(n, r.m) * detail::ipow(Count(alphabet - 1), r.m);
  r.paperCrudeBound = double(crude);
  r.crudeHolds = r.crudeLhs < crude;
  r.stirlingBound = std::exp((r.delta + eps) * n);
  r.stirlingHolds = double(r.exactCount) <= r.stirlingBound;
  return r;
}

struct HammingScan {
  std::vector<HammingBallReport> rows;
  std::optional<int> stirlingFrom;  // least n from which the bound holds through the end of the range
  std::optional<int> crudeFrom;
};

inline HammingScan scan_hamming_bounds(int nLo, int nHi, int alphabet, double eps) {
  require(nLo >= 1 && nLo <= nHi, ErrorKind::InvalidArgument, "need 1 <= nLo <= nHi");
  HammingScan s;
  for (int n = nLo; n <= nHi; ++n) s.rows.push_back(hamming_ball_bound_check(n, alphabet, eps));
  for (auto it = s.rows.rbegin(); it != s.rows.rend() && it->stirlingHolds; ++it) s.stirlingFrom = it->n;
  for (auto it = s.rows.rbegin(); it != s.rows.rend() && it->crudeHolds; ++it) s.crudeFrom = it->n;
  return s;
}

}  // namespace ergokit
