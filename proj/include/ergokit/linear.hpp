#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>

#include "ergokit/systems.hpp"

namespace ergokit {

inline Eigen::Matrix2d to_eigen(const ToralAutomorphism& a) {
  Eigen::Matrix2d m;
  m << double(a.m[0]), double(a.m[1]), double(a.m[2]), double(a.m[3]);
  return m;
}

/// Largest singular value of A^n (n may be negative).
inline double operator_norm(const ToralAutomorphism& a, int n) {
  Eigen::Matrix2d m = to_eigen(a);
  if (n < 0) m = m.inverse().eval();
  Eigen::Matrix2d p = Eigen::Matrix2d::Identity();
  for (int k = 0; k < std::abs(n); ++k) p = p * m;
  Eigen::JacobiSVD<Eigen::Matrix2d> svd(p);
  return svd.singularValues()(0);
}

struct Eigenpair {
  double value;
  std::array<double, 2> vector;  // unit length
};

/// Eigenpair with the largest |eigenvalue| (the expanding direction when hyperbolic).
inline Eigenpair unstable_direction(const ToralAutomorphism& a) {
  Eigen::EigenSolver<Eigen::Matrix2d> es(to_eigen(a));
  const auto ev = es.eigenvalues();
  const int k = std::abs(ev(0)) >= std::abs(ev(1)) ? 0 : 1;
  Eigen::Vector2d v = es.eigenvectors().col(k).real().normalized();
  return {ev(k).real(), {v(0), v(1)}};
}

inline double log_expansion(const ToralAutomorphism& a) { return std::log(std::fabs(unstable_direction(a).value)); }

}  // namespace ergokit
