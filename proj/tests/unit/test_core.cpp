#include <gtest/gtest.h>

#include <cmath>

#include "iphs/building/building_model.hpp"
#include "iphs/core/integrate.hpp"
#include "iphs/core/invariants.hpp"
#include "iphs/core/skew_symmetric.hpp"
#include "iphs/error.hpp"
#include "iphs/gas/gas_piston.hpp"
#include "test_support.hpp"

using namespace iphs;
using iphs::testing::Draw;

namespace {

// Reverses the sign of the heating gain to break monotonicity on purpose.
class NegatedHeating : public core::DynamicsModel {
 public:
  explicit NegatedHeating(const building::BuildingModel& inner) : inner_(inner) {}
  std::size_t state_dim() const noexcept override { return inner_.state_dim(); }
  std::size_t input_dim() const noexcept override { return inner_.input_dim(); }
  core::StateVector rhs(std::span<const double> x, std::span<const double> u) const override {
    const std::size_t n = state_dim();
    std::vector<double> flipped(u.begin(), u.end());
    for (std::size_t i = 0; i < n; ++i) flipped[1 + n + i] = -flipped[1 + n + i];
    return inner_.rhs(x, flipped);
  }

 private:
  const building::BuildingModel& inner_;
};

// dx/dt = -x with a constant scalar input ignored.
class Decay : public core::DynamicsModel {
 public:
  std::size_t state_dim() const noexcept override { return 1; }
  std::size_t input_dim() const noexcept override { return 1; }
  core::StateVector rhs(std::span<const double> x, std::span<const double>) const override {
    return {-x[0]};
  }
};

}  // namespace

TEST(SkewSymmetric, SetGetAndAntisymmetry) {
  core::SkewSymmetricMatrix m(4);
  m.set(0, 2, 1.5);
  m.set(3, 1, -0.25);
  EXPECT_EQ(m.get(0, 2), 1.5);
  EXPECT_EQ(m.get(2, 0), -1.5);
  EXPECT_EQ(m.get(1, 3), 0.25);
  EXPECT_EQ(m.get(2, 2), 0.0);
  EXPECT_THROW(m.set(1, 1, 2.0), Error);
}

TEST(SkewSymmetric, MaterializedSumWithTransposeIsExactlyZero) {
  Draw draw(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + draw.index(6);
    core::SkewSymmetricMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j)
        if (draw.uniform(0, 1) < 0.6) m.set(i, j, draw.normal(1e3));
    const auto a = m.materialize();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) ASSERT_EQ(a[i * n + j] + a[j * n + i], 0.0);
  }
}

TEST(SkewSymmetric, QuadraticFormVanishes) {
  Draw draw(12);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + draw.index(8);
    core::SkewSymmetricMatrix m(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) m.set(i, j, draw.normal());
    const auto x = draw.normal_vec(n, 100.0);
    double scale = 0.0;
    const auto a = m.materialize();
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) scale += std::abs(x[i] * a[i * n + j] * x[j]);
    EXPECT_LE(std::abs(m.bilinear(x, x)), 1e-14 * std::max(scale, 1.0));
    const auto mx = m.apply(x);
    double dot = 0.0;
    for (std::size_t i = 0; i < n; ++i) dot += x[i] * mx[i];
    EXPECT_LE(std::abs(dot), 1e-13 * std::max(scale, 1.0));
  }
}

TEST(Integrate, ForwardEulerStepOnGasPiston) {
  const gas::GasPistonModel model{gas::GasPistonTruth{}};
  const double x[] = {0.0, 0.001, 0.3, 0.0};
  const double u[] = {0.0};
  const auto next = core::fe_step(model, x, u, 0.01);
  // At rest: dp = alpha*P0 - beta*K*q = 3343.725 - 3
  EXPECT_NEAR(next[3], 33.40725, 1e-9);
  EXPECT_EQ(next[0], 0.0);
  EXPECT_EQ(next[1], 0.001);
  EXPECT_EQ(next[2], 0.3);
}

TEST(Integrate, RolloutLengthAndErrors) {
  const Decay model;
  const double x0[] = {1.0};
  const std::vector<core::InputVector> inputs(10, core::InputVector{0.0});
  const auto traj = core::fe_rollout(model, x0, inputs, 0.1);
  ASSERT_EQ(traj.size(), 11u);
  EXPECT_NEAR(traj.back()[0], std::pow(0.9, 10), 1e-15);
  const double bad_x[] = {1.0, 2.0};
  EXPECT_THROW(core::fe_step(model, bad_x, inputs[0], 0.1), DimensionError);
  const double nan_x[] = {NAN};
  EXPECT_THROW(core::fe_step(model, nan_x, inputs[0], 0.1), NumericError);
}

TEST(Invariants, EnergyAndEntropyOnTruthGasPiston) {
  const gas::GasPistonModel model{gas::GasPistonTruth{}};
  Draw draw(13);
  for (int trial = 0; trial < 200; ++trial) {
    const double x[] = {draw.uniform(-0.5, 0.5), draw.uniform(5e-4, 2e-3), draw.uniform(-1, 1),
                        draw.uniform(-20, 20)};
    const auto g = model.hamiltonian_grad(x);
    const auto f = model.internal_rhs(x);
    double scale = 0.0;
    for (int i = 0; i < 4; ++i) scale += std::abs(g[i] * f[i]);
    EXPECT_LE(core::check_energy_conservation(model, x), 1e-12 * scale);
    EXPECT_GE(core::check_entropy_production(model, x), 0.0);
  }
}

TEST(Invariants, CapabilityErrorWithoutHamiltonian) {
  const Decay model;
  const double x[] = {1.0};
  EXPECT_THROW(core::check_energy_conservation(model, x), CapabilityError);
}

TEST(Invariants, MonotonicityHoldsAndCounterexampleIsCaught) {
  const building::BuildingModel model(building::reference_building(3));
  const double t[] = {293.0, 295.0, 291.0};
  const auto s = model.encode(t);
  std::vector<double> lo(model.input_dim(), 0.0);
  lo[0] = 280.0;
  auto hi = lo;
  hi[1 + 3 + 1] += 1000.0;
  EXPECT_TRUE(core::check_monotonicity(model, s, lo, hi));
  const NegatedHeating broken(model);
  EXPECT_FALSE(core::check_monotonicity(broken, s, lo, hi));
}
