#include <gtest/gtest.h>

#include <gencann/energy_net.hpp>

#include <cmath>
#include <random>

#include "support/finite_difference.hpp"

using namespace gencann;

namespace {

NetArchitecture arch(int in, std::vector<int> hidden, Activation a = Activation::softplus,
                     OutputActivation o = OutputActivation::linear, std::uint64_t seed = 1) {
  NetArchitecture n;
  n.input_width = in;
  n.hidden_widths = std::move(hidden);
  n.hidden_activation = a;
  n.output_activation = o;
  n.seed = seed;
  return n;
}

// one hidden unit: params = [w, b, w_out, b_out]
ParamVector single_unit(double w, double b, double w_out, double b_out) {
  ParamVector p(4);
  p << w, b, w_out, b_out;
  return p;
}

} // namespace

TEST(EnergyNet, ParamCountAndLayout) {
  EnergyNet net(arch(3, {4, 2}));
  EXPECT_EQ(net.param_count(), 3 * 4 + 4 + 4 * 2 + 2 + 2 + 1);
  const auto mask = net.weight_mask();
  EXPECT_EQ(mask.sum(), 12 + 8 + 2);
  EXPECT_EQ(mask[12], 0.0); // first bias
}

TEST(EnergyNet, RejectsBadArchitecture) {
  EXPECT_THROW(EnergyNet(arch(3, {})), InvalidInput);
  EXPECT_THROW(EnergyNet(arch(0, {4})), InvalidInput);
  EXPECT_THROW(EnergyNet(arch(2, {4, 0})), InvalidInput);
}

TEST(EnergyNet, InitIsDeterministicPerSeed) {
  EnergyNet a(arch(3, {8, 8}, Activation::softplus, OutputActivation::linear, 5));
  EnergyNet b(arch(3, {8, 8}, Activation::softplus, OutputActivation::linear, 5));
  EnergyNet c(arch(3, {8, 8}, Activation::softplus, OutputActivation::linear, 6));
  EXPECT_EQ(a.init_params(), b.init_params());
  EXPECT_NE(a.init_params(), c.init_params());
  // glorot bounds, zero biases
  const auto p = a.init_params();
  EXPECT_LE(p.head(24).cwiseAbs().maxCoeff(), std::sqrt(6.0 / 11.0));
  EXPECT_EQ(p.segment(24, 8).cwiseAbs().maxCoeff(), 0.0);
}

TEST(EnergyNet, DegenerateUniformInitGivesZeroWeights) {
  auto n = arch(2, {5, 3});
  n.initializer = {Initializer::Kind::uniform, 0.0, 0.0};
  EXPECT_EQ(EnergyNet(n).init_params().cwiseAbs().maxCoeff(), 0.0);
}

TEST(EnergyNet, UniformInitRespectsBounds) {
  auto n = arch(2, {50});
  n.initializer = {Initializer::Kind::uniform, 0.1, 0.2};
  const auto p = EnergyNet(n).init_params();
  const auto m = EnergyNet(n).weight_mask();
  for (Eigen::Index i = 0; i < p.size(); ++i)
    if (m[i] > 0) {
      EXPECT_GE(p[i], 0.1);
      EXPECT_LE(p[i], 0.2);
    }
}

TEST(EnergyNet, FiberAngleInitInRange) {
  for (std::uint64_t s = 0; s < 200; ++s) {
    const double a = initial_fiber_angle(s);
    EXPECT_GE(a, 0.0);
    EXPECT_LE(a, 0.5 * std::numbers::pi);
  }
  EXPECT_EQ(initial_fiber_angle(3), initial_fiber_angle(3));
}

TEST(EnergyNet, ZeroNetworkIsZero) {
  EnergyNet net(arch(3, {4, 4}));
  const ParamVector p = ParamVector::Zero(net.param_count());
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int k = 0; k < 10; ++k) {
    Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(3, [&] { return u(rng); });
    EXPECT_EQ(net.forward(p, x), 0.0);
    EXPECT_EQ(net.grad_inputs(p, x).cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(EnergyNet, SingleSoftplusUnit) {
  EnergyNet net(arch(1, {1}));
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(1);
  EXPECT_NEAR(net.forward(single_unit(1, 0, 1, 0), x0), 0.693147, 1e-6);
  EXPECT_NEAR(net.forward(single_unit(1, 0, 1, 0), x0), std::log(2.0), 1e-15);
  // dPsi/dx = w * sigmoid(0) * w_out
  EXPECT_NEAR(net.grad_inputs(single_unit(1.7, 0, -0.6, 0), x0)[0], 1.7 * 0.5 * -0.6, 1e-15);
}

TEST(EnergyNet, ReferenceStateComposition) {
  // x = 0, zero biases: every hidden unit sits at act(0) and the output is sum(w_out) * act(0)
  auto n = arch(2, {3});
  EnergyNet net(n);
  ParamVector p = net.init_params();
  const double s = p.segment(6 + 3, 3).sum();
  EXPECT_NEAR(net.forward(p, Eigen::VectorXd::Zero(2)), s * std::log(2.0), 1e-14);
  n.hidden_activation = Activation::tanh;
  EXPECT_EQ(EnergyNet(n).forward(p, Eigen::VectorXd::Zero(2)), 0.0);
}

TEST(EnergyNet, DimensionMismatchThrows) {
  EnergyNet net(arch(3, {4}));
  EXPECT_THROW(net.forward(net.init_params(), Eigen::VectorXd::Zero(2)), InvalidInput);
  EXPECT_THROW(net.grad_inputs(net.init_params(), Eigen::VectorXd::Zero(4)), InvalidInput);
}

class EnergyNetActivations : public ::testing::TestWithParam<std::tuple<Activation, OutputActivation>> {};

TEST_P(EnergyNetActivations, InputGradientMatchesFiniteDifferences) {
  const auto [act, out] = GetParam();
  EnergyNet net(arch(4, {6, 5}, act, out, 21));
  const ParamVector p = net.init_params();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.5, 1.5);
  for (int k = 0; k < 100; ++k) {
    const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(4, [&] { return u(rng); });
    const auto fd = gencann::testing::fd_gradient([&](const Eigen::VectorXd& y) { return net.forward(p, y); }, x);
    EXPECT_LT(gencann::testing::max_rel_err(net.grad_inputs(p, x), fd, 1e-7), 1e-6);
  }
}

TEST_P(EnergyNetActivations, DirectionalParamGradMatchesFiniteDifferences) {
  const auto [act, out] = GetParam();
  EnergyNet net(arch(3, {5, 4}, act, out, 33));
  const ParamVector p = net.init_params();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1, 1);
  Eigen::MatrixXd X = Eigen::MatrixXd::NullaryExpr(3, 6, [&] { return u(rng); });
  Eigen::MatrixXd U = Eigen::MatrixXd::NullaryExpr(3, 6, [&] { return u(rng); });
  auto S = [&](const ParamVector& q) { return net.grad_inputs_batch(q, X).cwiseProduct(U).sum(); };
  const auto g = net.directional_param_grad(p, X, U);
  EXPECT_NEAR(g.value, S(p), 1e-12);
  const Eigen::VectorXd fd = gencann::testing::fd_gradient(S, p);
  EXPECT_LT(gencann::testing::max_rel_err(g.d_params, fd, 1e-7), 1e-5);
  // dS/dX = Hessian * U, checked against differences of S over X
  for (int b = 0; b < 6; ++b) {
    auto Sx = [&](const Eigen::VectorXd& xb) {
      Eigen::MatrixXd Y = X;
      Y.col(b) = xb;
      return net.grad_inputs_batch(p, Y).cwiseProduct(U).sum();
    };
    const Eigen::VectorXd fdx = gencann::testing::fd_gradient(Sx, Eigen::VectorXd(X.col(b)));
    EXPECT_LT(gencann::testing::max_rel_err(Eigen::VectorXd(g.d_inputs.col(b)), fdx, 1e-7), 1e-5);
  }
}

INSTANTIATE_TEST_SUITE_P(
    All, EnergyNetActivations,
    ::testing::Combine(::testing::Values(Activation::softplus, Activation::tanh, Activation::exp_minus_one,
                                         Activation::relu_smooth),
                       ::testing::Values(OutputActivation::linear, OutputActivation::softplus)));

TEST(EnergyNet, ProjectionClampsWeightsOnly) {
  auto n = arch(2, {4});
  n.nonneg_weights = true;
  EnergyNet net(n);
  EXPECT_GE(net.init_params().minCoeff(), 0.0);
  ParamVector p = ParamVector::Constant(net.param_count(), -1.0);
  net.project(p);
  const auto m = net.weight_mask();
  for (Eigen::Index i = 0; i < p.size(); ++i) EXPECT_EQ(p[i], m[i] > 0 ? 0.0 : -1.0);
}

TEST(EnergyNet, NonnegativeSoftplusNetIsMonotone) {
  auto n = arch(3, {8, 8});
  n.nonneg_weights = true;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-2, 2), step(0, 1);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    n.seed = seed;
    EnergyNet net(n);
    ParamVector p = net.init_params();
    p += ParamVector::NullaryExpr(p.size(), [&] { return u(rng); });
    net.project(p);
    for (int k = 0; k < 100; ++k) {
      const Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(3, [&] { return u(rng); });
      const Eigen::VectorXd y = x + Eigen::VectorXd::NullaryExpr(3, [&] { return step(rng); });
      EXPECT_LE(net.forward(p, x), net.forward(p, y) + 1e-12);
    }
  }
}

TEST(EnergyNet, ForwardIsPure) {
  EnergyNet net(arch(2, {7}, Activation::tanh));
  const auto p = net.init_params();
  Eigen::VectorXd x(2);
  x << 0.3, -0.2;
  const double a = net.forward(p, x);
  EXPECT_EQ(a, net.forward(p, x));
  EXPECT_EQ(net.grad_inputs(p, x), net.grad_inputs(p, x));
}
