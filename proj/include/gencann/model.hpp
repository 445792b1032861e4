#pragma once

// Executable constitutive model compiled from a CannSpec.
//
// Pipeline: F -> C -> invariants (+ stretches) -> features x -> Psi(x)
//   -> P_iso = sum_k dPsi/dx_k * dx_k/dF -> sigma_iso = J^-1 P_iso F^T
//   -> pressure elimination on the traction-free axis -> requested components.
//
// For fixed kinematics every predicted component is linear in dPsi/dx, which
// is what makes the exact parameter gradient of the stress loss cheap (see
// EnergyNet::directional_param_grad).

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "cann_spec.hpp"
#include "dsl.hpp"
#include "energy_net.hpp"
#include "mechanics.hpp"

namespace gencann {

enum class StressMeasure { nominal, cauchy };

inline std::string_view to_string(StressMeasure m) { return m == StressMeasure::nominal ? "nominal" : "cauchy"; }
inline std::optional<StressMeasure> stress_measure_from_string(std::string_view s) {
  if (s == "nominal") return StressMeasure::nominal;
  if (s == "cauchy") return StressMeasure::cauchy;
  return std::nullopt;
}

using Component = std::pair<int, int>;

/// Components reported for a loading mode: the shear entry for simple shear,
/// otherwise the first `count` normal in-plane entries.
inline std::vector<Component> output_components(const LoadingMode& mode, int count) {
  if (mode.kind == LoadingKind::simple_shear) return {{0, 1}};
  if (count == 2) return {{0, 0}, {1, 1}};
  return {{0, 0}};
}

inline std::string component_name(StressMeasure m, Component c) {
  return std::string(m == StressMeasure::nominal ? "P" : "sigma") + std::to_string(c.first + 1) +
         std::to_string(c.second + 1);
}

struct StressPrediction {
  StressMeasure measure = StressMeasure::nominal;
  std::vector<std::pair<std::string, double>> components;
  Tensor3 tensor = Tensor3::Zero(); ///< full stress tensor in `measure`

  double operator[](std::size_t i) const { return components.at(i).second; }
};

/// Convert an isochoric Piola stress into the requested measure after pressure elimination.
inline Tensor3 finish_stress(const Tensor3& F, const Tensor3& P_iso, int free_direction, StressMeasure m) {
  const Tensor3 sigma = eliminate_pressure(cauchy_from_piola(F, P_iso), free_direction);
  return m == StressMeasure::cauchy ? sigma : piola_from_cauchy(F, sigma);
}

/// Linear functional D -> [finish_stress(F, D, free, m)](i, j), as a 3x3 weight matrix.
inline Tensor3 stress_functional(const Tensor3& F, int free_direction, StressMeasure m, Component c) {
  Tensor3 M;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      Tensor3 E = Tensor3::Zero();
      E(a, b) = 1.0;
      M(a, b) = finish_stress(F, E, free_direction, m)(c.first, c.second);
    }
  return M;
}

/// One training/evaluation state: kinematics plus the components compared against targets.
struct FeatureContext {
  Tensor3 F = Tensor3::Identity();
  int free_direction = 2;
  StressMeasure measure = StressMeasure::nominal;
  std::vector<Component> components;
  std::vector<double> targets;
  double weight = 1.0;
  /// Cached stress_functional per component; filled by prepare().
  std::vector<Tensor3> functionals;

  void prepare() {
    functionals.clear();
    for (auto c : components) functionals.push_back(stress_functional(F, free_direction, measure, c));
  }
};

struct LossConfig {
  double l2_weight = 0.0;
  double reference_penalty_weight = 0.0;
};

struct LossAndGrad {
  double loss = 0.0;
  ParamVector grad;
};

class BuildError : public std::runtime_error {
public:
  explicit BuildError(dsl::ValidationReport report)
      : std::runtime_error(summarize(report)), report_(std::move(report)) {}
  const dsl::ValidationReport& report() const { return report_; }

private:
  static std::string summarize(const dsl::ValidationReport& r) {
    std::string s = "invalid spec:";
    for (const auto& v : r) s += " " + v.path + ": " + v.message + ";";
    return s;
  }
  dsl::ValidationReport report_;
};

class ConstitutiveModel {
public:
  const CannSpec& spec() const { return spec_; }
  const EnergyNet& net() const { return net_; }
  const ParamVector& params() const { return params_; }
  int feature_width() const { return net_.input_width(); }
  bool has_fiber() const { return spec_.transversely_isotropic(); }
  Eigen::Index param_count() const { return net_.param_count() + (has_fiber() ? 1 : 0); }

  /// Replaces all parameters; the fiber angle is re-projected onto [0, pi/2].
  void set_params(ParamVector p) {
    if (p.size() != param_count())
      throw InvalidInput("expected " + std::to_string(param_count()) + " parameters, got " + std::to_string(p.size()));
    params_ = std::move(p);
    project(params_);
  }

  void project(ParamVector& p) const {
    net_.project(p.head(net_.param_count()));
    if (has_fiber()) p[p.size() - 1] = std::clamp(p[p.size() - 1], 0.0, 0.5 * std::numbers::pi);
  }

  std::optional<double> fiber_angle() const {
    if (!has_fiber()) return std::nullopt;
    return params_[params_.size() - 1];
  }
  std::optional<Tensor3> structure_tensor(const ParamVector& p) const {
    if (!has_fiber()) return std::nullopt;
    return FiberDirection{p[p.size() - 1]}.structure_tensor();
  }

  Eigen::VectorXd features(const Tensor3& F) const { return kinematics(F, params_).x; }

  double energy(const Tensor3& F) const { return energy(F, params_); }
  double energy(const Tensor3& F, const ParamVector& p) const {
    Eigen::MatrixXd X = kinematics(F, p).x;
    return net_.forward_batch(p, X)(0);
  }

  /// dPsi/dF, with stretch features differentiated as F_ii on diagonal states.
  Tensor3 piola_iso(const Tensor3& F) const { return piola_iso(F, params_); }
  Tensor3 piola_iso(const Tensor3& F, const ParamVector& p) const {
    const Kinematics k = kinematics(F, p);
    Eigen::MatrixXd X = k.x;
    const Eigen::VectorXd g = net_.grad_inputs_batch(p, X).col(0);
    Tensor3 P = Tensor3::Zero();
    for (int i = 0; i < g.size(); ++i) P += g[i] * k.dx_dF[std::size_t(i)];
    if (!P.allFinite()) throw EvaluationError("non-finite stress");
    return P;
  }

  /// Full stress tensor after pressure elimination.
  Tensor3 stress_tensor(const Tensor3& F, int free_direction, StressMeasure m) const {
    return finish_stress(F, piola_iso(F), free_direction, m);
  }

  StressPrediction predict_stress(const LoadingMode& mode, StressMeasure m, int component_count = 1) const {
    check_mode(mode);
    const Tensor3 F = deformation_gradient(mode);
    StressPrediction out;
    out.measure = m;
    out.tensor = stress_tensor(F, mode.free_direction, m);
    for (auto c : output_components(mode, component_count))
      out.components.emplace_back(component_name(m, c), out.tensor(c.first, c.second));
    for (auto& [n, v] : out.components)
      if (!std::isfinite(v)) throw EvaluationError("non-finite stress component " + n);
    return out;
  }

  void check_mode(const LoadingMode& mode) const {
    if (spec_.features.use_stretches && !mode.is_diagonal())
      throw InvalidInput("stretch features are only defined for diagonal (non-shear) loading states");
  }

  /// Weighted squared stress residual plus penalties, and its exact gradient over all parameters.
  LossAndGrad loss_and_param_grad(const ParamVector& p, const std::vector<FeatureContext>& batch,
                                  const LossConfig& cfg) const {
    if (batch.empty() && !(cfg.reference_penalty_weight > 0.0)) throw InvalidInput("empty batch");
    const Eigen::Index nn = net_.param_count();
    std::vector<const FeatureContext*> items;
    items.reserve(batch.size() + 1);
    for (const auto& b : batch) items.push_back(&b);
    FeatureContext reference;
    if (cfg.reference_penalty_weight > 0.0) {
      reference.measure = StressMeasure::cauchy;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          reference.components.push_back({i, j});
          reference.targets.push_back(0.0);
        }
      reference.weight = cfg.reference_penalty_weight;
      items.push_back(&reference);
    }

    const int width = feature_width();
    const Eigen::Index B = Eigen::Index(items.size());
    Eigen::MatrixXd X(width, B);
    std::vector<Kinematics> kin;
    kin.reserve(items.size());
    for (Eigen::Index s = 0; s < B; ++s) {
      kin.push_back(kinematics(items[std::size_t(s)]->F, p));
      X.col(s) = kin.back().x;
    }
    const Eigen::MatrixXd G = net_.grad_inputs_batch(p, X);

    LossAndGrad out;
    out.grad = ParamVector::Zero(param_count());
    Eigen::MatrixXd U = Eigen::MatrixXd::Zero(width, B);
    double d_angle = 0.0;
    for (Eigen::Index s = 0; s < B; ++s) {
      const FeatureContext& ctx = *items[std::size_t(s)];
      const Kinematics& k = kin[std::size_t(s)];
      if (ctx.components.size() != ctx.targets.size()) throw InvalidInput("component/target count mismatch");
      for (std::size_t c = 0; c < ctx.components.size(); ++c) {
        const Tensor3 M = ctx.functionals.size() == ctx.components.size()
                              ? ctx.functionals[c]
                              : stress_functional(ctx.F, ctx.free_direction, ctx.measure, ctx.components[c]);
        Eigen::VectorXd coeff(width);
        for (int i = 0; i < width; ++i) coeff[i] = M.cwiseProduct(k.dx_dF[std::size_t(i)]).sum();
        const double r = G.col(s).dot(coeff) - ctx.targets[c];
        out.loss += ctx.weight * r * r;
        U.col(s) += 2.0 * ctx.weight * r * coeff;
        if (has_fiber() && spec_.fiber->trainable) {
          double dc = 0.0; // G . d(coeff)/d(angle)
          for (int i = 0; i < width; ++i) dc += G(i, s) * M.cwiseProduct(k.d2x_dF_dangle[std::size_t(i)]).sum();
          d_angle += 2.0 * ctx.weight * r * dc;
        }
      }
    }

    const auto dg = net_.directional_param_grad(p, X, U);
    out.grad.head(nn) = dg.d_params;
    if (cfg.l2_weight > 0.0) {
      const Eigen::VectorXd mask = net_.weight_mask();
      const Eigen::VectorXd w = p.head(nn).cwiseProduct(mask);
      out.loss += cfg.l2_weight * w.squaredNorm();
      out.grad.head(nn) += 2.0 * cfg.l2_weight * w;
    }
    if (has_fiber() && spec_.fiber->trainable) {
      for (Eigen::Index s = 0; s < B; ++s) d_angle += dg.d_inputs.col(s).dot(kin[std::size_t(s)].dx_dangle);
      out.grad[nn] = d_angle;
    }
    return out;
  }

private:
  friend ConstitutiveModel build(const CannSpec&);

  ConstitutiveModel(CannSpec spec, EnergyNet net) : spec_(std::move(spec)), net_(std::move(net)) {}

  struct Kinematics {
    Eigen::VectorXd x;
    std::vector<Tensor3> dx_dF;          ///< d x_i / dF
    Eigen::VectorXd dx_dangle;           ///< d x_i / d(fiber angle)
    std::vector<Tensor3> d2x_dF_dangle;  ///< d/d(angle) of d x_i / dF
  };

  Kinematics kinematics(const Tensor3& F, const ParamVector& p) const {
    const int width = feature_width();
    Kinematics k;
    k.x.resize(width);
    k.dx_dF.assign(std::size_t(width), Tensor3::Zero());
    k.dx_dangle = Eigen::VectorXd::Zero(width);
    k.d2x_dF_dangle.assign(std::size_t(width), Tensor3::Zero());

    const Tensor3 C = right_cauchy_green(F);
    const std::optional<Tensor3> N = structure_tensor(p);
    const InvariantSet inv = invariants(C, N);
    const InvariantGradients grads = invariant_gradients(F, N);

    int i = 0;
    if (spec_.features.use_stretches) {
      for (int a = 0; a < 3; ++a, ++i) {
        k.x[i] = F(a, a) - 1.0;
        k.dx_dF[std::size_t(i)](a, a) = 1.0;
      }
    }
    for (Invariant which : spec_.features.invariants) {
      const auto slot = std::size_t(i);
      switch (which) {
      case Invariant::I1:
        k.x[i] = inv.i1 - 3.0;
        k.dx_dF[slot] = grads.d_i1;
        break;
      case Invariant::I2:
        k.x[i] = inv.i2 - 3.0;
        k.dx_dF[slot] = grads.d_i2;
        break;
      case Invariant::I4:
      case Invariant::I5: {
        const Tensor3 dN = FiberDirection{p[p.size() - 1]}.structure_tensor_derivative();
        if (which == Invariant::I4) {
          k.x[i] = *inv.i4 - 1.0;
          k.dx_dF[slot] = grads.d_i4;
          k.dx_dangle[i] = dN.cwiseProduct(C).sum();
          k.d2x_dF_dangle[slot] = 2.0 * F * dN;
        } else {
          k.x[i] = *inv.i5 - 1.0;
          k.dx_dF[slot] = grads.d_i5;
          k.dx_dangle[i] = dN.cwiseProduct(C * C).sum();
          k.d2x_dF_dangle[slot] = 2.0 * F * (dN * C + C * dN);
        }
        break;
      }
      }
      ++i;
    }
    return k;
  }

  CannSpec spec_;
  EnergyNet net_;
  ParamVector params_;
};

/// Deterministic compilation of a validated spec into a model with initial parameters.
inline ConstitutiveModel build(const CannSpec& spec) {
  auto report = dsl::validate(spec);
  if (!report.empty()) throw BuildError(std::move(report));
  ConstitutiveModel m(spec, EnergyNet(spec.architecture()));
  ParamVector p(m.param_count());
  p.head(m.net_.param_count()) = m.net_.init_params();
  if (spec.fiber) {
    const auto& f = *spec.fiber;
    const double u = initial_fiber_angle(spec.network.seed) / (0.5 * std::numbers::pi);
    p[p.size() - 1] = f.angle ? *f.angle : f.low + (f.high - f.low) * u;
  }
  m.set_params(std::move(p));
  return m;
}

} // namespace gencann
