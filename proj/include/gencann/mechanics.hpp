#pragma once

// Kinematics and stress algebra for incompressible hyperelasticity.
//
// Conventions: F is the deformation gradient, C = F^T F, N = n (x) n the
// structure tensor of a single fiber family. Stresses are 3x3 tensors; the
// first Piola-Kirchhoff stress P is nominal, sigma is Cauchy.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "errors.hpp"

namespace gencann {

using Tensor3 = Eigen::Matrix3d;

enum class LoadingKind {
  uniaxial_tension,
  uniaxial_compression,
  simple_shear,
  equibiaxial,
  pure_shear,
  biaxial,
};

inline std::string_view to_string(LoadingKind k) {
  switch (k) {
  case LoadingKind::uniaxial_tension: return "uniaxial_tension";
  case LoadingKind::uniaxial_compression: return "uniaxial_compression";
  case LoadingKind::simple_shear: return "simple_shear";
  case LoadingKind::equibiaxial: return "equibiaxial";
  case LoadingKind::pure_shear: return "pure_shear";
  case LoadingKind::biaxial: return "biaxial";
  }
  return "?";
}

inline std::optional<LoadingKind> loading_kind_from_string(std::string_view s) {
  for (auto k : {LoadingKind::uniaxial_tension, LoadingKind::uniaxial_compression,
                 LoadingKind::simple_shear, LoadingKind::equibiaxial, LoadingKind::pure_shear,
                 LoadingKind::biaxial})
    if (to_string(k) == s) return k;
  return std::nullopt;
}

/// One point of a canonical loading protocol.
///
/// `magnitude` is the stretch lambda (or the shear gamma for simple shear);
/// `second_magnitude` is lambda2 for biaxial states only. `free_direction`
/// names the axis whose normal Cauchy stress is traction-free.
struct LoadingMode {
  LoadingKind kind = LoadingKind::uniaxial_tension;
  double magnitude = 1.0;
  std::optional<double> second_magnitude;
  int free_direction = 2;

  static LoadingMode uniaxial(double stretch) {
    return {stretch < 1.0 ? LoadingKind::uniaxial_compression : LoadingKind::uniaxial_tension,
            stretch, std::nullopt, 2};
  }
  static LoadingMode shear(double gamma) { return {LoadingKind::simple_shear, gamma, std::nullopt, 2}; }
  static LoadingMode equibiaxial(double stretch) {
    return {LoadingKind::equibiaxial, stretch, std::nullopt, 2};
  }
  static LoadingMode pure_shear(double stretch) {
    return {LoadingKind::pure_shear, stretch, std::nullopt, 2};
  }
  static LoadingMode biaxial(double l1, double l2) { return {LoadingKind::biaxial, l1, l2, 2}; }

  bool is_diagonal() const { return kind != LoadingKind::simple_shear; }
};

/// In-plane fiber direction n = [cos a, sin a, 0].
struct FiberDirection {
  double angle = 0.0;

  Eigen::Vector3d direction() const { return {std::cos(angle), std::sin(angle), 0.0}; }
  Tensor3 structure_tensor() const {
    const Eigen::Vector3d n = direction();
    return n * n.transpose();
  }
  /// dN/d(angle)
  Tensor3 structure_tensor_derivative() const {
    const Eigen::Vector3d n = direction();
    const Eigen::Vector3d dn{-std::sin(angle), std::cos(angle), 0.0};
    return dn * n.transpose() + n * dn.transpose();
  }
};

struct InvariantSet {
  double i1 = 0, i2 = 0, i3 = 0;
  std::optional<double> i4, i5;
};

struct InvariantGradients {
  Tensor3 d_i1, d_i2, d_i4, d_i5;
};

inline Tensor3 deformation_gradient(const LoadingMode& mode) {
  const double a = mode.magnitude;
  if (!std::isfinite(a)) throw InvalidInput("non-finite loading magnitude");
  if (mode.free_direction < 0 || mode.free_direction > 2)
    throw InvalidInput("free direction must be 0, 1 or 2");
  if (mode.kind == LoadingKind::simple_shear) {
    Tensor3 F = Tensor3::Identity();
    F(0, 1) = a;
    return F;
  }
  if (a <= 0.0) throw InvalidInput("stretch must be positive, got " + std::to_string(a));
  switch (mode.kind) {
  case LoadingKind::uniaxial_tension:
  case LoadingKind::uniaxial_compression: {
    const double lat = 1.0 / std::sqrt(a);
    return Eigen::Vector3d(a, lat, lat).asDiagonal();
  }
  case LoadingKind::equibiaxial: return Eigen::Vector3d(a, a, 1.0 / (a * a)).asDiagonal();
  case LoadingKind::pure_shear: return Eigen::Vector3d(a, 1.0, 1.0 / a).asDiagonal();
  case LoadingKind::biaxial: {
    if (!mode.second_magnitude) throw InvalidInput("biaxial mode needs a second stretch");
    const double b = *mode.second_magnitude;
    if (!(b > 0.0)) throw InvalidInput("stretch must be positive, got " + std::to_string(b));
    return Eigen::Vector3d(a, b, 1.0 / (a * b)).asDiagonal();
  }
  case LoadingKind::simple_shear: break;
  }
  throw InvalidInput("unknown loading kind");
}

inline Tensor3 right_cauchy_green(const Tensor3& F) {
  if (!(F.determinant() > 0.0)) throw InvalidInput("det(F) must be positive");
  return F.transpose() * F;
}

inline InvariantSet invariants(const Tensor3& C, const std::optional<Tensor3>& N = std::nullopt) {
  if ((C - C.transpose()).cwiseAbs().maxCoeff() > 1e-10)
    throw InvalidInput("right Cauchy-Green tensor is not symmetric");
  const Tensor3 C2 = C * C;
  const double tr = C.trace();
  InvariantSet out;
  out.i1 = tr;
  out.i2 = 0.5 * (tr * tr - C2.trace());
  out.i3 = C.determinant();
  if (N) {
    out.i4 = N->cwiseProduct(C).sum();
    out.i5 = N->cwiseProduct(C2).sum();
  }
  return out;
}

/// Closed-form derivatives of I1, I2, I4, I5 with respect to F.
/// d_i4 / d_i5 are zero when no structure tensor is supplied.
inline InvariantGradients invariant_gradients(const Tensor3& F,
                                              const std::optional<Tensor3>& N = std::nullopt) {
  const Tensor3 C = F.transpose() * F;
  InvariantGradients g;
  g.d_i1 = 2.0 * F;
  g.d_i2 = 2.0 * F * (C.trace() * Tensor3::Identity() - C);
  if (N) {
    g.d_i4 = 2.0 * F * (*N);
    g.d_i5 = 2.0 * F * ((*N) * C + C * (*N));
  } else {
    g.d_i4.setZero();
    g.d_i5.setZero();
  }
  return g;
}

inline Tensor3 cauchy_from_piola(const Tensor3& F, const Tensor3& P) {
  const double J = F.determinant();
  if (!(J > 0.0)) throw InvalidInput("det(F) must be positive");
  return P * F.transpose() / J;
}

inline Tensor3 piola_from_cauchy(const Tensor3& F, const Tensor3& sigma) {
  const double J = F.determinant();
  if (!(J > 0.0)) throw InvalidInput("det(F) must be positive");
  return J * sigma * F.inverse().transpose();
}

/// sigma - p I with p = sigma(free, free); the free diagonal entry becomes exactly zero.
inline Tensor3 eliminate_pressure(const Tensor3& sigma_iso, int free_direction) {
  if (free_direction < 0 || free_direction > 2) throw InvalidInput("free direction must be 0, 1 or 2");
  Tensor3 out = sigma_iso;
  const double p = sigma_iso(free_direction, free_direction);
  for (int i = 0; i < 3; ++i) out(i, i) -= p;
  out(free_direction, free_direction) = 0.0;
  return out;
}

} // namespace gencann
