#include "iphs/train/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>
#include <thread>

#include "iphs/core/integrate.hpp"
#include "iphs/error.hpp"

namespace iphs::train {

namespace {

struct TrajectoryGradient {
  double loss = 0.0;
  std::vector<double> grad;
};

std::vector<std::string> penalty_groups(const core::TrainableModel& model,
                                        std::span<const std::string> groups) {
  if (!groups.empty()) return {groups.begin(), groups.end()};
  return {model.default_l1_group()};
}

std::vector<double> target_row(const core::TrainableModel& model, std::span<const double> z,
                               LossSpace space) {
  if (space == LossSpace::State) return model.encode(z);
  return {z.begin(), z.end()};
}

TrajectoryGradient one_trajectory(const core::TrainableModel& model, const data::Trajectory& traj,
                                  const TrainConfig& config, std::size_t traj_id, ad::Tape& tape) {
  const auto& values = model.parameters().values();
  tape.clear();
  std::vector<ad::Var> theta;
  std::vector<ad::NodeId> leaves;
  theta.reserve(values.size());
  leaves.reserve(values.size());
  for (double v : values) {
    theta.push_back(ad::make_leaf(tape, v));
    leaves.push_back(theta.back().id());
  }

  TrajectoryGradient out;
  out.grad.assign(values.size(), 0.0);
  if (traj.steps() == 0) return out;

  const auto x0 = model.encode(traj.states.front());
  std::vector<ad::Var> x(x0.begin(), x0.end());
  ad::Var acc(0.0);
  for (std::size_t i = 0; i < traj.steps(); ++i) {
    const auto dx = model.rhs_tape(theta, x, traj.inputs[i]);
    for (std::size_t k = 0; k < x.size(); ++k) x[k] = x[k] + config.h * dx[k];
    const auto target = target_row(model, traj.states[i + 1], config.loss_space);
    const auto pred = config.loss_space == LossSpace::State ? x : model.observe_tape(theta, x);
    for (std::size_t d = 0; d < pred.size(); ++d) {
      const ad::Var diff = pred[d] - target[d];
      acc = acc + diff * diff;
    }
    if (!std::isfinite(acc.value()))
      throw NumericError("non-finite loss on trajectory " + std::to_string(traj_id) + " at step " +
                         std::to_string(i + 1));
  }
  out.loss = acc.value();
  if (!acc.is_constant()) out.grad = tape.gradient(acc.id(), leaves);
  return out;
}

GradientResult gradient_impl(const core::TrainableModel& model,
                             const std::vector<const data::Trajectory*>& batch,
                             const TrainConfig& config) {
  const std::size_t p = model.parameters().size();
  GradientResult result;
  result.gradient.assign(p, 0.0);
  if (batch.empty()) return result;

  std::vector<TrajectoryGradient> parts(batch.size());
  const std::size_t workers =
      std::min<std::size_t>(batch.size(), std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    ad::Tape tape;
    for (std::size_t j = 0; j < batch.size(); ++j)
      parts[j] = one_trajectory(model, *batch[j], config, j, tape);
  } else {
    std::vector<std::exception_ptr> errors(workers);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          ad::Tape tape;
          for (std::size_t j = w; j < batch.size(); j += workers)
            parts[j] = one_trajectory(model, *batch[j], config, j, tape);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  // Ordered reduction keeps the result independent of thread scheduling.
  const double scale = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const auto& part : parts) {
    total += part.loss;
    for (std::size_t i = 0; i < p; ++i) result.gradient[i] += part.grad[i];
  }
  result.loss = total * scale;
  for (auto& g : result.gradient) g *= scale;

  if (config.l1_weight > 0.0) {
    ad::Tape tape;
    std::vector<ad::Var> theta;
    std::vector<ad::NodeId> leaves;
    for (double v : model.parameters().values()) {
      theta.push_back(ad::make_leaf(tape, v));
      leaves.push_back(theta.back().id());
    }
    const auto groups = penalty_groups(model, config.l1_groups);
    const ad::Var pen = l1_penalty(model, theta, groups);
    result.loss += config.l1_weight * pen.value();
    if (!pen.is_constant()) {
      const auto g = tape.gradient(pen.id(), leaves);
      for (std::size_t i = 0; i < p; ++i) result.gradient[i] += config.l1_weight * g[i];
    }
  }
  return result;
}

double mean_loss(const core::TrainableModel& model, std::span<const data::Trajectory> set,
                 const TrainConfig& config) {
  if (set.empty()) return 0.0;
  double total = 0.0;
  for (const auto& t : set) total += trajectory_loss(model, t, config.h, config.loss_space);
  return total / static_cast<double>(set.size());
}

}  // namespace

double loss(std::span<const std::vector<double>> predicted,
            std::span<const std::vector<double>> measured) {
  if (predicted.size() != measured.size())
    throw DimensionError("loss rows", measured.size(), predicted.size());
  double acc = 0.0;
  for (std::size_t i = 1; i < predicted.size(); ++i) {
    if (predicted[i].size() != measured[i].size())
      throw DimensionError("loss row " + std::to_string(i), measured[i].size(), predicted[i].size());
    for (std::size_t d = 0; d < predicted[i].size(); ++d) {
      const double diff = predicted[i][d] - measured[i][d];
      acc += diff * diff;
    }
  }
  return acc;
}

ad::Var l1_penalty(const core::TrainableModel& model, std::span<const ad::Var> theta,
                   std::span<const std::string> groups) {
  ad::Var acc(0.0);
  for (const auto& g : groups)
    for (const auto& v : model.effective_tape(theta, g)) acc = acc + ad::abs(v);
  return acc;
}

double l1_penalty(const core::TrainableModel& model, std::span<const std::string> groups) {
  double acc = 0.0;
  for (const auto& g : groups)
    for (double v : model.effective(g)) acc += std::fabs(v);
  return acc;
}

std::vector<std::vector<double>> predict(const core::TrainableModel& model,
                                         const data::Trajectory& traj, double h) {
  const auto x0 = model.encode(traj.states.front());
  const auto xs = core::fe_rollout(model, x0, traj.inputs, h);
  std::vector<std::vector<double>> out;
  out.reserve(xs.size());
  for (const auto& x : xs) out.push_back(model.observe(x));
  return out;
}

double trajectory_loss(const core::TrainableModel& model, const data::Trajectory& traj, double h,
                       LossSpace space) {
  const auto x0 = model.encode(traj.states.front());
  const auto xs = core::fe_rollout(model, x0, traj.inputs, h);
  double acc = 0.0;
  for (std::size_t i = 1; i < xs.size(); ++i) {
    const auto target = target_row(model, traj.states[i], space);
    const auto pred = space == LossSpace::State ? xs[i] : model.observe(xs[i]);
    for (std::size_t d = 0; d < pred.size(); ++d) {
      const double diff = pred[d] - target[d];
      acc = acc + diff * diff;
    }
  }
  return acc;
}

double objective(const core::TrainableModel& model, std::span<const data::Trajectory> batch,
                 const TrainConfig& config) {
  if (batch.empty()) return 0.0;
  double total = 0.0;
  for (const auto& t : batch) total += trajectory_loss(model, t, config.h, config.loss_space);
  double value = total * (1.0 / static_cast<double>(batch.size()));
  if (config.l1_weight > 0.0)
    value += config.l1_weight * l1_penalty(model, penalty_groups(model, config.l1_groups));
  return value;
}

GradientResult bptt_gradient(const core::TrainableModel& model,
                             std::span<const data::Trajectory> batch, const TrainConfig& config) {
  std::vector<const data::Trajectory*> ptrs;
  for (const auto& t : batch) ptrs.push_back(&t);
  return gradient_impl(model, ptrs, config);
}

void adam_step(std::span<double> params, std::span<const double> grads, double lr, AdamState& s) {
  if (grads.size() != params.size()) throw DimensionError("adam gradient", params.size(), grads.size());
  if (s.m.size() != params.size()) {
    s.m.assign(params.size(), 0.0);
    s.v.assign(params.size(), 0.0);
    s.t = 0;
  }
  ++s.t;
  const double c1 = 1.0 - std::pow(AdamState::beta1, static_cast<double>(s.t));
  const double c2 = 1.0 - std::pow(AdamState::beta2, static_cast<double>(s.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    s.m[i] = AdamState::beta1 * s.m[i] + (1.0 - AdamState::beta1) * grads[i];
    s.v[i] = AdamState::beta2 * s.v[i] + (1.0 - AdamState::beta2) * grads[i] * grads[i];
    const double m_hat = s.m[i] / c1;
    const double v_hat = s.v[i] / c2;
    params[i] -= lr * m_hat / (std::sqrt(v_hat) + AdamState::eps);
  }
}

TrainResult train(core::TrainableModel& model, std::span<const data::Trajectory> train_set,
                  std::span<const data::Trajectory> validation_set, const TrainConfig& config) {
  if (config.epochs < 0) throw Error("train: epochs must be non-negative");
  if (!(config.learning_rate > 0.0)) throw Error("train: learning rate must be positive");
  if (config.batch_size == 0) throw Error("train: batch size must be positive");
  for (const auto& t : train_set)
    if (std::fabs(t.h - config.h) > 1e-9 * std::fabs(config.h))
      throw Error("train: trajectory step " + data::format_double(t.h) +
                  " does not match configured h " + data::format_double(config.h));

  auto& values = model.parameters().values();
  const bool has_val = !validation_set.empty();
  auto select_loss = [&](double train_l, double val_l) { return has_val ? val_l : train_l; };

  TrainResult result;
  const double train0 = mean_loss(model, train_set, config);
  const double val0 = has_val ? mean_loss(model, validation_set, config) : train0;
  double best = select_loss(train0, val0);
  const double reference = best;
  result.best_params = values;
  result.history.push_back({0, train0, val0, best});

  std::mt19937_64 rng(config.seed);
  AdamState adam;
  std::vector<std::size_t> order(train_set.size());

  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);

    double epoch_loss = 0.0;
    bool failed = false;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      std::vector<const data::Trajectory*> batch;
      for (std::size_t k = start; k < end; ++k) batch.push_back(&train_set[order[k]]);
      GradientResult g;
      try {
        g = gradient_impl(model, batch, config);
      } catch (const NumericError& e) {
        result.diverged = true;
        result.message = "epoch " + std::to_string(epoch) + ": " + e.what();
        failed = true;
        break;
      }
      if (config.gradient_clip) {
        double inf_norm = 0.0;
        for (double v : g.gradient) inf_norm = std::max(inf_norm, std::fabs(v));
        if (inf_norm > *config.gradient_clip)
          for (auto& v : g.gradient) v *= *config.gradient_clip / inf_norm;
      }
      adam_step(values, g.gradient, config.learning_rate, adam);
      if (config.on_step) config.on_step(model);
      epoch_loss += g.loss * static_cast<double>(batch.size());
    }
    if (failed) break;

    const double train_l = train_set.empty() ? 0.0 : epoch_loss / static_cast<double>(train_set.size());
    double val_l = 0.0;
    try {
      val_l = has_val ? mean_loss(model, validation_set, config) : mean_loss(model, train_set, config);
    } catch (const NumericError& e) {
      val_l = std::numeric_limits<double>::quiet_NaN();
    }
    if (!std::isfinite(val_l) || val_l > 1e6 * reference) {
      result.diverged = true;
      result.message = "epoch " + std::to_string(epoch) + ": validation loss diverged (" +
                       data::format_double(val_l) + ")";
      break;
    }
    if (val_l < best) {
      best = val_l;
      result.best_params = values;
      result.best_epoch = epoch;
    }
    result.history.push_back({epoch, train_l, val_l, best});
  }

  result.final_params = values;
  model.parameters().assign(result.best_params);
  std::ostringstream rs;
  rs << rng;
  result.rng_state = rs.str();
  return result;
}

}  // namespace iphs::train
