#include <gtest/gtest.h>

#include <cmath>

#include "iphs/ad/parameters.hpp"
#include "iphs/baselines/vanilla_node.hpp"
#include "iphs/building/building_model.hpp"
#include "iphs/core/integrate.hpp"
#include "iphs/core/invariants.hpp"
#include "iphs/error.hpp"
#include "iphs/gas/gas_piston.hpp"
#include "iphs/train/trainer.hpp"
#include "test_support.hpp"

using namespace iphs;
using iphs::testing::Draw;

namespace {

// Rollout of `model` itself recorded as a trajectory, in measurement space.
data::Trajectory self_rollout(const core::TrainableModel& model, std::span<const double> z0,
                              std::vector<core::InputVector> inputs, double h) {
  data::Trajectory t;
  t.h = h;
  const auto xs = core::fe_rollout(model, model.encode(z0), inputs, h);
  for (const auto& x : xs) t.states.push_back(model.observe(x));
  t.inputs = std::move(inputs);
  t.state_labels = model.output_labels();
  t.input_labels = model.input_labels();
  return t;
}

std::vector<data::Trajectory> building_chunks(std::size_t steps, std::uint64_t seed) {
  const auto truth = building::reference_building(3);
  const auto inputs = building::synth_building_inputs(3, steps, 900.0, seed);
  const double t0[] = {292.0, 294.0, 291.0};
  auto traj = building::synth_building_generate(truth, inputs, t0, 900.0);
  return data::chunk(traj, 51);
}

std::vector<data::Trajectory> gas_chunks(const core::TrainableModel& shape_source, std::uint64_t seed) {
  Draw draw(seed);
  std::vector<data::Trajectory> out;
  for (int c = 0; c < 3; ++c) {
    std::vector<core::InputVector> u;
    for (int k = 0; k < 50; ++k) u.push_back({std::sin(0.3 * k + c)});
    data::Trajectory t;
    t.h = 0.05;
    std::vector<double> x = draw.uniform_vec(4, -1, 1);
    const gas::LearnedGasPiston truth(6, 10.0, seed + 100);
    const auto xs = core::fe_rollout(truth, x, u, 0.05);
    for (const auto& row : xs) {
      std::vector<double> noisy = row;
      for (auto& v : noisy) v += draw.normal(0.05);
      t.states.push_back(noisy);
    }
    t.inputs = u;
    t.state_labels = shape_source.state_labels();
    t.input_labels = shape_source.input_labels();
    out.push_back(std::move(t));
  }
  return out;
}

double bptt_vs_fd(core::TrainableModel& model, std::span<const data::Trajectory> batch,
                  const train::TrainConfig& cfg, double eps) {
  const auto analytic = train::bptt_gradient(model, batch, cfg);
  const std::vector<double> theta0 = model.parameters().values();
  const ad::ScalarFunction f = [&](std::span<const double> th) {
    model.parameters().assign(th);
    return train::objective(model, batch, cfg);
  };
  const auto fd = ad::finite_diff_gradient(f, theta0, eps);
  model.parameters().assign(theta0);
  EXPECT_NEAR(analytic.loss, train::objective(model, batch, cfg), 1e-12 * std::max(1.0, analytic.loss));
  return iphs::testing::max_rel_error(analytic.gradient, fd);
}

}  // namespace

TEST(Loss, SquaredErrorSkipsInitialRow) {
  const std::vector<std::vector<double>> pred = {{100.0, 100.0}, {3.0, 4.0}};
  const std::vector<std::vector<double>> meas = {{0.0, 0.0}, {0.0, 0.0}};
  EXPECT_DOUBLE_EQ(train::loss(pred, meas), 25.0);
  const std::vector<std::vector<double>> short_meas = {{0.0, 0.0}};
  EXPECT_THROW(train::loss(pred, short_meas), DimensionError);
}

TEST(Loss, L1PenaltyOnEffectiveValues) {
  baselines::VanillaNode model(1, 0, 1, 0, false);
  auto w3 = model.parameters().segment("W3");
  ASSERT_EQ(w3.size(), 1u);
  w3[0] = -2.0;
  model.parameters().segment("b3")[0] = 3.0;
  const std::vector<std::string> groups = {"W3", "b3"};
  EXPECT_DOUBLE_EQ(train::l1_penalty(model, groups), 5.0);
}

TEST(Bptt, BuildingGradientMatchesFiniteDifferences) {
  building::BuildingModel model(
      building::BuildingParams::initial_guess(building::Adjacency::chain(3), {292.0, 294.0, 291.0}));
  const auto chunks = building_chunks(100, 3);
  ASSERT_GE(chunks.size(), 1u);
  train::TrainConfig cfg;
  cfg.h = 900.0;
  cfg.l1_weight = 1e-3;
  const std::vector<data::Trajectory> batch(chunks.begin(), chunks.begin() + 1);
  EXPECT_LT(bptt_vs_fd(model, batch, cfg, 1e-6), 1e-5);
  cfg.loss_space = train::LossSpace::State;
  EXPECT_LT(bptt_vs_fd(model, batch, cfg, 1e-6), 1e-5);
}

TEST(Bptt, GasGradientMatchesFiniteDifferences) {
  gas::LearnedGasPiston model(6, 10.0, 4);
  const auto batch = gas_chunks(model, 5);
  train::TrainConfig cfg;
  cfg.h = 0.05;
  cfg.l1_weight = 0.01;
  EXPECT_LT(bptt_vs_fd(model, batch, cfg, 1e-6), 1e-5);
}

TEST(Bptt, VanillaGradientMatchesFiniteDifferences) {
  baselines::VanillaNode model(4, 1, 8, 6);
  const auto batch = gas_chunks(model, 7);
  train::TrainConfig cfg;
  cfg.h = 0.05;
  EXPECT_LT(bptt_vs_fd(model, batch, cfg, 1e-6), 1e-5);
}

TEST(Bptt, PerfectModelHasZeroGradient) {
  const gas::LearnedGasPiston model(6, 10.0, 8);
  std::vector<core::InputVector> u;
  for (int k = 0; k < 50; ++k) u.push_back({std::cos(0.2 * k)});
  const double z0[] = {0.1, -0.2, 0.3, 0.4};
  const std::vector<data::Trajectory> batch{self_rollout(model, z0, u, 0.05)};
  train::TrainConfig cfg;
  cfg.h = 0.05;
  const auto g = train::bptt_gradient(model, batch, cfg);
  EXPECT_EQ(g.loss, 0.0);
  double norm = 0.0;
  for (double v : g.gradient) norm += v * v;
  EXPECT_LT(std::sqrt(norm), 1e-8);
}

TEST(Bptt, NonFiniteLossIsReported) {
  const baselines::VanillaNode model(1, 0, 2, 0, false);
  data::Trajectory t;
  t.h = 0.1;
  t.states.assign(20, {1.0});
  t.states[7][0] = NAN;
  t.inputs.assign(19, {});
  const std::vector<data::Trajectory> batch{t};
  train::TrainConfig cfg;
  cfg.h = 0.1;
  try {
    (void)train::bptt_gradient(model, batch, cfg);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("step 7"), std::string::npos) << e.what();
  }
}

TEST(Adam, ZeroGradientLeavesParametersUnchanged) {
  std::vector<double> p = {1.0, -2.0};
  const std::vector<double> g = {0.0, 0.0};
  train::AdamState s;
  for (int i = 0; i < 10; ++i) train::adam_step(p, g, 0.1, s);
  EXPECT_EQ(p[0], 1.0);
  EXPECT_EQ(p[1], -2.0);
}

TEST(Adam, FirstStepHasLearningRateMagnitude) {
  std::vector<double> p = {0.0, 0.0};
  const std::vector<double> g = {3.0, -1e-3};
  train::AdamState s;
  train::adam_step(p, g, 0.01, s);
  EXPECT_NEAR(p[0], -0.01, 1e-10);
  EXPECT_NEAR(p[1], 0.01, 1e-7);
}

TEST(Adam, ConvergesOnQuadratic) {
  std::vector<double> p = {3.0, -4.0};
  train::AdamState s;
  for (int i = 0; i < 2000; ++i) {
    const std::vector<double> g = {2.0 * (p[0] - 1.0), 20.0 * (p[1] + 0.5)};
    train::adam_step(p, g, 0.05, s);
  }
  EXPECT_LT(std::abs(p[0] - 1.0), 1e-6);
  EXPECT_LT(std::abs(p[1] + 0.5), 1e-6);
}

TEST(Train, ZeroEpochsReturnsInitialParameters) {
  gas::LearnedGasPiston model(4, 10.0, 1);
  const auto before = model.parameters().values();
  const auto data = gas_chunks(model, 2);
  train::TrainConfig cfg;
  cfg.h = 0.05;
  cfg.epochs = 0;
  const auto r = train::train(model, data, {}, cfg);
  EXPECT_EQ(r.best_params, before);
  EXPECT_EQ(model.parameters().values(), before);
  ASSERT_EQ(r.history.size(), 1u);
  EXPECT_EQ(r.best_epoch, 0);
}

TEST(Train, BestValidationLossIsMonotoneAndDeterministic) {
  const auto data = gas_chunks(gas::LearnedGasPiston(4), 9);
  const std::vector<data::Trajectory> tr(data.begin(), data.begin() + 2);
  const std::vector<data::Trajectory> va(data.begin() + 2, data.end());
  train::TrainConfig cfg;
  cfg.h = 0.05;
  cfg.epochs = 15;
  cfg.batch_size = 1;
  cfg.learning_rate = 5e-3;
  cfg.seed = 11;
  gas::LearnedGasPiston a(4, 10.0, 2), b(4, 10.0, 2);
  const auto ra = train::train(a, tr, va, cfg);
  const auto rb = train::train(b, tr, va, cfg);
  ASSERT_FALSE(ra.diverged) << ra.message;
  ASSERT_EQ(ra.history.size(), 16u);
  for (std::size_t i = 1; i < ra.history.size(); ++i)
    EXPECT_LE(ra.history[i].best_val_loss, ra.history[i - 1].best_val_loss);
  EXPECT_LT(ra.history.back().best_val_loss, ra.history.front().best_val_loss);
  EXPECT_EQ(ra.final_params, rb.final_params);
  EXPECT_EQ(ra.rng_state, rb.rng_state);
  for (std::size_t i = 0; i < ra.history.size(); ++i) EXPECT_EQ(ra.history[i].val_loss, rb.history[i].val_loss);
  EXPECT_EQ(a.parameters().values(), ra.best_params);
}

TEST(Train, StructureHoldsAfterEveryStep) {
  building::BuildingModel model(
      building::BuildingParams::initial_guess(building::Adjacency::chain(3), {292.0, 294.0, 291.0}));
  const auto chunks = building_chunks(400, 12);
  train::TrainConfig cfg;
  cfg.h = 900.0;
  cfg.epochs = 3;
  cfg.batch_size = 2;
  cfg.learning_rate = 0.5;
  Draw draw(13);
  std::size_t checks = 0;
  cfg.on_step = [&](const core::TrainableModel& m) {
    EXPECT_TRUE(m.parameter_violations().empty());
    for (int k = 0; k < 20; ++k) {
      const auto t = draw.uniform_vec(3, 270, 310);
      const auto s = m.encode(t);
      EXPECT_GE(core::check_entropy_production(m, s), -1e-12);
      const auto f = m.internal_rhs(s);
      double scale = 0.0;
      for (int i = 0; i < 3; ++i) scale += std::abs(t[i] * f[i]);
      EXPECT_LE(core::check_energy_conservation(m, s), 1e-10 * std::max(scale, 1e-300));
    }
    ++checks;
  };
  const auto r = train::train(model, chunks, {}, cfg);
  EXPECT_FALSE(r.diverged);
  EXPECT_EQ(checks, 3u * ((chunks.size() + 1) / 2));
}

TEST(Train, MismatchedStepRejected) {
  gas::LearnedGasPiston model(4);
  const auto data = gas_chunks(model, 2);
  train::TrainConfig cfg;
  cfg.h = 0.1;
  EXPECT_THROW(train::train(model, data, {}, cfg), Error);
  cfg.h = 0.05;
  cfg.batch_size = 0;
  EXPECT_THROW(train::train(model, data, {}, cfg), Error);
}

TEST(Train, GasEntropyRateStaysNonNegativeAfterEveryStep) {
  gas::LearnedGasPiston model(6, 10.0, 21);
  const auto data = gas_chunks(model, 22);
  train::TrainConfig cfg;
  cfg.h = 0.05;
  cfg.epochs = 10;
  cfg.batch_size = 1;
  cfg.learning_rate = 0.05;
  Draw draw(23);
  std::size_t checks = 0;
  cfg.on_step = [&](const core::TrainableModel& m) {
    for (int k = 0; k < 50; ++k) {
      const auto x = draw.uniform_vec(4, -3, 3);
      ASSERT_GE(core::check_entropy_production(m, x), 0.0);
    }
    ++checks;
  };
  const auto r = train::train(model, data, {}, cfg);
  EXPECT_FALSE(r.diverged);
  EXPECT_EQ(checks, 30u);
}
