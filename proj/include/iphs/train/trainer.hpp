#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iphs/ad/var.hpp"
#include "iphs/core/dynamics_model.hpp"
#include "iphs/data/dataset.hpp"

namespace iphs::train {

enum class LossSpace {
  Observed,  // compare observe(x̂) with measurements (temperature for the building model)
  State,     // compare x̂ with encode(measurements)
};

struct TrainConfig {
  double h = 1.0;
  int epochs = 200;
  double learning_rate = 1e-2;
  std::size_t batch_size = 8;
  double l1_weight = 0.0;
  std::vector<std::string> l1_groups;  // empty: model's default group
  std::uint64_t seed = 0;
  std::optional<double> gradient_clip;  // ∞-norm threshold
  LossSpace loss_space = LossSpace::Observed;
  /// Called after every optimizer step (used to audit invariants during training).
  std::function<void(const core::TrainableModel&)> on_step;
};

/// Σᵢ ||zᵢ − xᵢ||² over rows 1..L (row 0 is the shared initial condition).
double loss(std::span<const std::vector<double>> predicted,
            std::span<const std::vector<double>> measured);

/// Σ |effective value| over the named groups.
ad::Var l1_penalty(const core::TrainableModel& model, std::span<const ad::Var> theta,
                   std::span<const std::string> groups);
double l1_penalty(const core::TrainableModel& model, std::span<const std::string> groups);

/// Rollout from the first measurement with the model's current parameters,
/// returned in measurement space.
std::vector<std::vector<double>> predict(const core::TrainableModel& model,
                                         const data::Trajectory& traj, double h);

/// Loss of one trajectory with the model's current parameters (double path).
double trajectory_loss(const core::TrainableModel& model, const data::Trajectory& traj,
                       double h, LossSpace space = LossSpace::Observed);

/// Batch objective: mean trajectory loss plus l1_weight · penalty.
double objective(const core::TrainableModel& model, std::span<const data::Trajectory> batch,
                 const TrainConfig& config);

struct GradientResult {
  double loss = 0.0;              // objective value
  std::vector<double> gradient;   // d objective / d raw parameters
};

/// Objective and its gradient by recording every rollout on a tape and
/// sweeping it backwards. Throws NumericError naming the trajectory and step
/// when the loss is not finite.
GradientResult bptt_gradient(const core::TrainableModel& model,
                             std::span<const data::Trajectory> batch, const TrainConfig& config);

/// Bias-corrected Adam (β₁ = 0.9, β₂ = 0.999, ε = 1e-8).
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long t = 0;

  static constexpr double beta1 = 0.9;
  static constexpr double beta2 = 0.999;
  static constexpr double eps = 1e-8;
};

void adam_step(std::span<double> params, std::span<const double> grads, double lr, AdamState& state);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double best_val_loss = 0.0;
};

struct TrainResult {
  std::vector<double> best_params;  // parameters with the lowest validation loss
  std::vector<double> final_params;
  std::vector<EpochRecord> history;  // epoch 0 is the initial model
  int best_epoch = 0;
  bool diverged = false;
  std::string message;
  std::string rng_state;  // shuffle engine state after the last epoch
};

/// Epoch loop over shuffled mini-batches of whole trajectories. The model is
/// left holding the best-validation parameters.
TrainResult train(core::TrainableModel& model, std::span<const data::Trajectory> train_set,
                  std::span<const data::Trajectory> validation_set, const TrainConfig& config);

}  // namespace iphs::train
