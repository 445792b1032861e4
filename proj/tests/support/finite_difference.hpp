#pragma once

// Test-only numerical oracles. Kept independent of the analytic paths they check.

#include <Eigen/Dense>

#include <cmath>
#include <random>

namespace gencann::testing {

/// Fourth-order central difference of a scalar function along one coordinate.
template <class Fn, class X>
double central_difference(Fn& f, const X& x, Eigen::Index i, double h) {
  auto at = [&](double t) {
    X y = x;
    y(i) += t;
    return f(y);
  };
  return (8.0 * (at(h) - at(-h)) - (at(2 * h) - at(-2 * h))) / (12.0 * h);
}

/// Central differences of a scalar function of a 3x3 matrix (column-major index).
template <class Fn>
Eigen::Matrix3d fd_gradient(Fn&& f, const Eigen::Matrix3d& F, double h = 1e-3) {
  Eigen::Matrix3d g;
  for (Eigen::Index k = 0; k < 9; ++k) g(k) = central_difference(f, F, k, h);
  return g;
}

/// Central differences of a scalar function of a vector.
template <class Fn>
Eigen::VectorXd fd_gradient(Fn&& f, const Eigen::VectorXd& x, double h = 1e-3) {
  Eigen::VectorXd g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) g[i] = central_difference(f, x, i, h);
  return g;
}

/// max |a - b| / (|b| + atol) elementwise; atol guards entries that are ~0.
template <class A, class B>
double max_rel_err(const A& a, const B& b, double atol) {
  return ((a - b).array().abs() / (b.array().abs() + atol)).maxCoeff();
}

inline Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Eigen::Quaterniond q(n(rng), n(rng), n(rng), n(rng));
  q.normalize();
  return q.toRotationMatrix();
}

/// Random deformation with det = 1 near identity: rotation * (I + small) rescaled.
inline Eigen::Matrix3d random_isochoric(std::mt19937_64& rng, double spread = 0.3) {
  std::uniform_real_distribution<double> u(-spread, spread);
  Eigen::Matrix3d F = Eigen::Matrix3d::Identity();
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) F(i, j) += u(rng);
  if (F.determinant() <= 0.1) F = Eigen::Matrix3d::Identity() + 0.1 * F;
  return F / std::cbrt(F.determinant());
}

} // namespace gencann::testing
