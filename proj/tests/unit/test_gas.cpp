#include <gtest/gtest.h>

#include <cmath>

#include "iphs/ad/parameters.hpp"
#include "iphs/core/invariants.hpp"
#include "iphs/error.hpp"
#include "iphs/gas/gas_piston.hpp"
#include "test_support.hpp"

using namespace iphs;
using namespace iphs::gas;
using iphs::testing::Draw;

namespace {

std::vector<double> random_state(Draw& draw) {
  return {draw.uniform(-2, 2), draw.uniform(-2, 2), draw.uniform(-2, 2), draw.uniform(-2, 2)};
}

}  // namespace

TEST(GasTruth, HamiltonianGradientMatchesFiniteDifferences) {
  const GasPistonModel model{GasPistonTruth{}};
  const std::vector<double> x = {0.05, 0.0012, 0.2, 1.5};
  const ad::ScalarFunction h = [&](std::span<const double> y) { return model.hamiltonian(y); };
  const double steps[] = {1e-5, 1e-9, 1e-6, 1e-6};
  const auto g = model.hamiltonian_grad(x);
  for (int i = 0; i < 4; ++i) {
    auto hi = x, lo = x;
    hi[i] += steps[i];
    lo[i] -= steps[i];
    const double fd = (h(hi) - h(lo)) / (2 * steps[i]);
    EXPECT_NEAR(g[i], fd, 1e-5 * std::max(1.0, std::abs(fd))) << "component " << i;
  }
}

TEST(GasTruth, ReferenceStateValues) {
  const GasPistonTruth p;
  EXPECT_NEAR(p.temperature(0.0, p.v0), 290.0, 1e-12);
  EXPECT_NEAR(p.pressure(0.0, p.v0), 101325.0, 1e-9);
  EXPECT_THROW(p.temperature(0.0, 0.0), NumericError);
}

TEST(GasTruth, ZeroVelocityGivesNoFlows) {
  const GasPistonTruth p;
  const double x[] = {0.1, 0.0011, -0.4, 0.0};
  const auto d = truth_rhs(p, x, 0.0);
  EXPECT_EQ(d[0], 0.0);
  EXPECT_EQ(d[1], 0.0);
  EXPECT_EQ(d[2], 0.0);
}

TEST(GasTruth, AssembledFormMatchesDirectEquations) {
  const GasPistonTruth p;
  const GasPistonModel model(p);
  Draw draw(31);
  for (int trial = 0; trial < 200; ++trial) {
    const double x[] = {draw.uniform(-0.3, 0.3), draw.uniform(5e-4, 2e-3), draw.uniform(-1, 1),
                        draw.uniform(-30, 30)};
    const double u = draw.uniform(-3, 3);
    const auto g = model.hamiltonian_grad(x);
    const double gamma = p.mu / g[0];
    const auto a = assemble_rhs<double>(g, gamma, p.alpha, p.beta, u);
    const auto d = truth_rhs(p, x, u);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(a[i], d[i], 1e-10 * std::max(1.0, std::abs(d[i])));
  }
}

TEST(LearnedGas, HamiltonianGradientMatchesFiniteDifferences) {
  Draw draw(32);
  for (int trial = 0; trial < 20; ++trial) {
    const LearnedGasPiston model(8, 10.0, trial);
    const auto x = random_state(draw);
    const auto g = model.hamiltonian_grad(x);
    const ad::ScalarFunction h = [&](std::span<const double> y) { return model.hamiltonian(y); };
    const auto fd = ad::finite_diff_gradient(h, x, 1e-6);
    EXPECT_LE(iphs::testing::max_rel_error(g, fd), 1e-8);
  }
}

TEST(LearnedGas, FreeFunctionsAgreeWithModel) {
  const LearnedGasPiston model(6, 10.0, 3);
  const double x[] = {0.3, -0.2, 1.1, 0.4};
  const auto& p = model.parameters();
  EXPECT_DOUBLE_EQ(log_cosh_hamiltonian(p.segment("H_K"), p.segment("H_b"), x), model.hamiltonian(x));
  const auto g = log_cosh_hamiltonian_grad(p.segment("H_K"), p.segment("H_b"), x);
  const auto g2 = model.hamiltonian_grad(x);
  for (int i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(g[i], g2[i]);
}

TEST(LearnedGas, GammaAtZeroActivationIsHalfScale) {
  LearnedGasPiston model(4, 10.0, 1);
  for (auto& w : model.parameters().segment("gamma_w")) w = 0.0;
  model.parameters().segment("gamma_b")[0] = 0.0;
  const double x[] = {1, 2, 3, 4};
  const double g[] = {5, 6, 7, 8};
  EXPECT_DOUBLE_EQ(model.gamma(x, g), 5.0);
}

TEST(LearnedGas, EntropyComponentNonNegativeForAnyParameters) {
  Draw draw(33);
  for (int trial = 0; trial < 1000; ++trial) {
    LearnedGasPiston model(8, 10.0, trial);
    for (auto& v : model.parameters().values()) v = draw.normal(3.0);
    const auto x = random_state(draw);
    const double rate = core::check_entropy_production(model, x);
    ASSERT_GE(rate, 0.0);
    const auto g = model.hamiltonian_grad(x);
    EXPECT_NEAR(rate, model.gamma(x, g) * g[3] * g[3], 1e-12 * std::max(1.0, rate));
  }
}

TEST(LearnedGas, EnergyConservedByInternalDynamics) {
  Draw draw(34);
  for (int trial = 0; trial < 1000; ++trial) {
    LearnedGasPiston model(8, 10.0, trial);
    for (auto& v : model.parameters().values()) v = draw.normal(1.0);
    const auto x = random_state(draw);
    const auto g = model.hamiltonian_grad(x);
    const auto f = model.internal_rhs(x);
    double scale = 0.0;
    for (int i = 0; i < 4; ++i) scale += std::abs(g[i] * f[i]);
    EXPECT_LE(core::check_energy_conservation(model, x), 1e-12 * std::max(scale, 1e-300));
  }
}

TEST(LearnedGas, TapeRhsMatchesDoubleRhs) {
  const LearnedGasPiston model(5, 10.0, 9);
  const double x[] = {0.2, -0.1, 0.5, 1.0};
  const double u[] = {0.7};
  ad::Tape tape;
  std::vector<ad::Var> theta, xv;
  for (double v : model.parameters().values()) theta.push_back(ad::make_leaf(tape, v));
  for (double v : x) xv.push_back(ad::make_leaf(tape, v));
  const auto a = model.rhs_tape(theta, xv, u);
  const auto b = model.rhs(x, u);
  for (int i = 0; i < 4; ++i) EXPECT_EQ(a[i].value(), b[i]);
}

TEST(LearnedGas, ConstructorValidation) {
  EXPECT_THROW(LearnedGasPiston(0), Error);
  EXPECT_THROW(LearnedGasPiston(4, 0.0), Error);
  const LearnedGasPiston m(4);
  EXPECT_EQ(m.parameters().size(), 4u * 4 + 4 + 8 + 1 + 2);
}
