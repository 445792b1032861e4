#pragma once

// Dense feed-forward energy network Psi(x) with exact input gradients and the
// parameter gradient of directional input derivatives, which is what training
// on stresses (derivatives of Psi) needs.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"

namespace gencann {

using ParamVector = Eigen::VectorXd;

enum class Activation { softplus, tanh, exp_minus_one, relu_smooth };
enum class OutputActivation { linear, softplus };

inline std::string_view to_string(Activation a) {
  switch (a) {
  case Activation::softplus: return "softplus";
  case Activation::tanh: return "tanh";
  case Activation::exp_minus_one: return "exp_minus_one";
  case Activation::relu_smooth: return "relu_smooth";
  }
  return "?";
}
inline std::string_view to_string(OutputActivation a) {
  return a == OutputActivation::linear ? "linear" : "softplus";
}
inline std::optional<Activation> activation_from_string(std::string_view s) {
  for (auto a : {Activation::softplus, Activation::tanh, Activation::exp_minus_one,
                 Activation::relu_smooth})
    if (to_string(a) == s) return a;
  return std::nullopt;
}
inline std::optional<OutputActivation> output_activation_from_string(std::string_view s) {
  if (s == "linear") return OutputActivation::linear;
  if (s == "softplus") return OutputActivation::softplus;
  return std::nullopt;
}

struct Initializer {
  enum class Kind { glorot_uniform, uniform } kind = Kind::glorot_uniform;
  double low = 0.0, high = 0.0; // uniform only

  bool operator==(const Initializer&) const = default;
};

struct NetArchitecture {
  int input_width = 1;
  std::vector<int> hidden_widths{16};
  Activation hidden_activation = Activation::softplus;
  OutputActivation output_activation = OutputActivation::linear;
  Initializer initializer;
  bool nonneg_weights = false;
  std::uint64_t seed = 0;

  bool operator==(const NetArchitecture&) const = default;

  void check() const {
    if (input_width < 1) throw InvalidInput("network input width must be positive");
    if (hidden_widths.empty()) throw InvalidInput("network needs at least one hidden layer");
    for (int w : hidden_widths)
      if (w < 1) throw InvalidInput("hidden layer widths must be positive");
  }

  /// Fan-in of every dense layer including the scalar output layer.
  std::vector<std::pair<int, int>> layer_shapes() const {
    std::vector<std::pair<int, int>> shapes; // (out, in)
    int in = input_width;
    for (int w : hidden_widths) {
      shapes.emplace_back(w, in);
      in = w;
    }
    shapes.emplace_back(1, in);
    return shapes;
  }

  Eigen::Index param_count() const {
    Eigen::Index n = 0;
    for (auto [o, i] : layer_shapes()) n += Eigen::Index(o) * i + o;
    return n;
  }
};

namespace detail {

using Mat = Eigen::MatrixXd;
using Arr = Eigen::ArrayXXd;

inline double softplus(double z) { return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }
inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

/// Value, first and second derivative of an activation, elementwise.
struct ActivationEval {
  Arr v, d1, d2;
};

inline ActivationEval eval_activation(Activation a, const Arr& z, bool need_d2) {
  ActivationEval out;
  switch (a) {
  case Activation::softplus: {
    out.v = z.unaryExpr([](double t) { return softplus(t); });
    out.d1 = z.unaryExpr([](double t) { return sigmoid(t); });
    if (need_d2) out.d2 = out.d1 * (1.0 - out.d1);
    break;
  }
  case Activation::tanh: {
    out.v = z.tanh();
    out.d1 = 1.0 - out.v.square();
    if (need_d2) out.d2 = -2.0 * out.v * out.d1;
    break;
  }
  case Activation::exp_minus_one: {
    const Arr e = z.exp();
    out.v = e - 1.0;
    out.d1 = e;
    if (need_d2) out.d2 = e;
    break;
  }
  case Activation::relu_smooth: {
    // 0.5 (z + sqrt(z^2 + 1)): a C-infinity ramp
    const Arr r = (z.square() + 1.0).sqrt();
    out.v = 0.5 * (z + r);
    out.d1 = 0.5 * (1.0 + z / r);
    if (need_d2) out.d2 = 0.5 / (r * r * r);
    break;
  }
  }
  return out;
}

inline ActivationEval eval_output(OutputActivation a, const Arr& z, bool need_d2) {
  if (a == OutputActivation::softplus) return eval_activation(Activation::softplus, z, need_d2);
  ActivationEval out;
  out.v = z;
  out.d1 = Arr::Ones(z.rows(), z.cols());
  if (need_d2) out.d2 = Arr::Zero(z.rows(), z.cols());
  return out;
}

} // namespace detail

/// Read-only view of the dense layers stored in a flat parameter vector.
/// Layout per layer: weights row-major (out x in), then biases (out).
class EnergyNet {
public:
  using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
  using ConstMatMap = Eigen::Map<const RowMat>;
  using ConstVecMap = Eigen::Map<const Eigen::VectorXd>;

  explicit EnergyNet(NetArchitecture arch) : arch_(std::move(arch)) {
    arch_.check();
    Eigen::Index off = 0;
    for (auto [o, i] : arch_.layer_shapes()) {
      layers_.push_back({o, i, off, off + Eigen::Index(o) * i});
      off += Eigen::Index(o) * i + o;
    }
    count_ = off;
  }

  const NetArchitecture& architecture() const { return arch_; }
  Eigen::Index param_count() const { return count_; }
  int input_width() const { return arch_.input_width; }

  /// Deterministic initialization from the architecture seed.
  ParamVector init_params() const {
    std::mt19937_64 rng(arch_.seed);
    ParamVector p = ParamVector::Zero(count_);
    for (const auto& L : layers_) {
      double lo, hi;
      if (arch_.initializer.kind == Initializer::Kind::glorot_uniform) {
        const double lim = std::sqrt(6.0 / double(L.in + L.out));
        lo = -lim;
        hi = lim;
      } else {
        lo = arch_.initializer.low;
        hi = arch_.initializer.high;
      }
      for (Eigen::Index k = 0; k < Eigen::Index(L.out) * L.in; ++k) p[L.w_off + k] = draw(rng, lo, hi);
    }
    if (arch_.nonneg_weights) project(p);
    return p;
  }

  /// Clamp weights (not biases) at zero when the architecture demands it.
  void project(Eigen::Ref<ParamVector> p) const {
    if (!arch_.nonneg_weights) return;
    for (const auto& L : layers_)
      p.segment(L.w_off, Eigen::Index(L.out) * L.in) =
          p.segment(L.w_off, Eigen::Index(L.out) * L.in).cwiseMax(0.0);
  }

  /// Mask with 1 on weight entries and 0 on biases.
  Eigen::VectorXd weight_mask() const {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(count_);
    for (const auto& L : layers_) m.segment(L.w_off, Eigen::Index(L.out) * L.in).setOnes();
    return m;
  }

  double forward(const ParamVector& p, const Eigen::VectorXd& x) const {
    check_shapes(p, x.size());
    Eigen::MatrixXd X = x;
    return forward_batch(p, X)(0);
  }

  Eigen::VectorXd grad_inputs(const ParamVector& p, const Eigen::VectorXd& x) const {
    check_shapes(p, x.size());
    Eigen::MatrixXd X = x;
    return grad_inputs_batch(p, X).col(0);
  }

  /// Psi for every column of X (input_width x batch).
  Eigen::RowVectorXd forward_batch(const ParamVector& p, const Eigen::MatrixXd& X) const {
    check_shapes(p, X.rows());
    Eigen::MatrixXd H = X;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
      const detail::Arr Z = pre_activation(p, l, H).array();
      H = detail::eval_activation(arch_.hidden_activation, Z, false).v.matrix();
    }
    const detail::Arr zo = pre_activation(p, layers_.size() - 1, H).array();
    return detail::eval_output(arch_.output_activation, zo, false).v.matrix();
  }

  /// dPsi/dx for every column of X.
  Eigen::MatrixXd grad_inputs_batch(const ParamVector& p, const Eigen::MatrixXd& X) const {
    check_shapes(p, X.rows());
    std::vector<detail::Arr> d1;
    Eigen::MatrixXd H = X;
    for (std::size_t l = 0; l + 1 < layers_.size(); ++l) {
      auto a = detail::eval_activation(arch_.hidden_activation, pre_activation(p, l, H).array(), false);
      H = a.v.matrix();
      d1.push_back(std::move(a.d1));
    }
    const auto out = detail::eval_output(arch_.output_activation,
                                         pre_activation(p, layers_.size() - 1, H).array(), false);
    // delta has the shape of the layer output, columns are batch entries
    Eigen::MatrixXd delta = weights(p, layers_.size() - 1).transpose() * out.d1.matrix();
    for (std::size_t l = layers_.size() - 1; l-- > 0;) {
      const Eigen::MatrixXd a = (delta.array() * d1[l]).matrix();
      delta = weights(p, l).transpose() * a;
    }
    return delta;
  }

  /// Result of differentiating S = sum_b U(:,b) . dPsi/dx(X(:,b)).
  struct DirectionalGrad {
    double value = 0.0;        ///< S itself
    ParamVector d_params;      ///< dS/dtheta
    Eigen::MatrixXd d_inputs;  ///< dS/dX (input_width x batch), i.e. Hessian(Psi) * U
  };

  /// Reverse pass through the forward-tangent graph of the network.
  ///
  /// The stress predicted by a CANN is linear in dPsi/dx for fixed kinematics,
  /// so the gradient of any stress loss with respect to the parameters reduces
  /// to this quantity with U carrying residual-weighted stress directions.
  DirectionalGrad directional_param_grad(const ParamVector& p, const Eigen::MatrixXd& X,
                                         const Eigen::MatrixXd& U) const {
    check_shapes(p, X.rows());
    if (U.rows() != X.rows() || U.cols() != X.cols()) throw InvalidInput("direction/input shape mismatch");
    const std::size_t nl = layers_.size();
    std::vector<Eigen::MatrixXd> H(nl), Hdot(nl); // layer inputs (H[0] = X)
    std::vector<detail::ActivationEval> act(nl - 1);
    std::vector<detail::Arr> Zdot(nl - 1);
    H[0] = X;
    Hdot[0] = U;
    for (std::size_t l = 0; l + 1 < nl; ++l) {
      const detail::Arr Z = pre_activation(p, l, H[l]).array();
      Zdot[l] = (weights(p, l) * Hdot[l]).array();
      act[l] = detail::eval_activation(arch_.hidden_activation, Z, true);
      H[l + 1] = act[l].v.matrix();
      Hdot[l + 1] = (act[l].d1 * Zdot[l]).matrix();
    }
    const std::size_t lo = nl - 1;
    const detail::Arr zo = pre_activation(p, lo, H[lo]).array();
    const detail::Arr zo_dot = (weights(p, lo) * Hdot[lo]).array();
    const auto out = detail::eval_output(arch_.output_activation, zo, true);

    DirectionalGrad g;
    g.value = (out.d1 * zo_dot).sum();
    g.d_params = ParamVector::Zero(count_);

    // adjoints of zo and zo_dot (1 x batch)
    Eigen::MatrixXd z_bar = (out.d2 * zo_dot).matrix();
    Eigen::MatrixXd zdot_bar = out.d1.matrix();
    for (std::size_t l = nl; l-- > 0;) {
      const auto& L = layers_[l];
      Eigen::Map<RowMat> w_bar(g.d_params.data() + L.w_off, L.out, L.in);
      w_bar.noalias() += z_bar * H[l].transpose();
      w_bar.noalias() += zdot_bar * Hdot[l].transpose();
      g.d_params.segment(L.b_off, L.out) += z_bar.rowwise().sum();
      Eigen::MatrixXd h_bar = weights(p, l).transpose() * z_bar;
      Eigen::MatrixXd hdot_bar = weights(p, l).transpose() * zdot_bar;
      if (l == 0) {
        g.d_inputs = std::move(h_bar);
        break;
      }
      // H[l] = act(Z[l-1]), Hdot[l] = act'(Z[l-1]) * Zdot[l-1]
      const auto& a = act[l - 1];
      zdot_bar = (a.d1 * hdot_bar.array()).matrix();
      z_bar = (a.d1 * h_bar.array() + a.d2 * Zdot[l - 1] * hdot_bar.array()).matrix();
    }
    return g;
  }

private:
  struct Layer {
    int out, in;
    Eigen::Index w_off, b_off;
  };

  static double draw(std::mt19937_64& rng, double lo, double hi) {
    if (lo == hi) return lo;
    // explicit mapping keeps draws identical across standard library implementations
    const double u = double(rng() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }

  void check_shapes(const ParamVector& p, Eigen::Index in) const {
    if (p.size() < count_) throw InvalidInput("parameter vector too short for architecture");
    if (in != arch_.input_width)
      throw InvalidInput("feature length " + std::to_string(in) + " does not match network input width " +
                         std::to_string(arch_.input_width));
  }

  ConstMatMap weights(const ParamVector& p, std::size_t l) const {
    const auto& L = layers_[l];
    return ConstMatMap(p.data() + L.w_off, L.out, L.in);
  }
  ConstVecMap biases(const ParamVector& p, std::size_t l) const {
    const auto& L = layers_[l];
    return ConstVecMap(p.data() + L.b_off, L.out);
  }
  Eigen::MatrixXd pre_activation(const ParamVector& p, std::size_t l, const Eigen::MatrixXd& H) const {
    Eigen::MatrixXd Z = weights(p, l) * H;
    Z.colwise() += biases(p, l);
    return Z;
  }

  NetArchitecture arch_;
  std::vector<Layer> layers_;
  Eigen::Index count_ = 0;
};

/// Uniform draw on [0, pi/2] for a trainable fiber angle, seeded independently of the weights.
inline double initial_fiber_angle(std::uint64_t seed) {
  std::mt19937_64 rng(seed ^ 0x9E3779B97F4A7C15ull);
  const double u = double(rng() >> 11) * 0x1.0p-53;
  return 0.5 * std::numbers::pi * u;
}

} // namespace gencann
