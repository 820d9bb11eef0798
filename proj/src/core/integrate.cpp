#include "iphs/core/integrate.hpp"

#include <cmath>
#include <string>

#include "iphs/error.hpp"

namespace iphs::core {

namespace {

bool all_finite(std::span<const double> v) {
  for (double d : v)
    if (!std::isfinite(d)) return false;
  return true;
}

}  // namespace

StateVector fe_step(const DynamicsModel& model, std::span<const double> x,
                    std::span<const double> u, double h) {
  if (x.size() != model.state_dim()) throw DimensionError("state", model.state_dim(), x.size());
  if (u.size() != model.input_dim()) throw DimensionError("input", model.input_dim(), u.size());
  if (!(h >= 0.0)) throw Error("fe_step: step size must be non-negative");
  if (!all_finite(x)) throw NumericError("non-finite state", {x.begin(), x.end()});

  const StateVector dx = model.rhs(x, u);
  if (dx.size() != x.size()) throw DimensionError("rhs output", x.size(), dx.size());
  if (!all_finite(dx)) throw NumericError("non-finite right-hand side", {x.begin(), x.end()});

  StateVector next(x.begin(), x.end());
  for (std::size_t i = 0; i < next.size(); ++i) next[i] += h * dx[i];
  return next;
}

std::vector<StateVector> fe_rollout(const DynamicsModel& model, std::span<const double> x0,
                                    std::span<const InputVector> inputs, double h) {
  std::vector<StateVector> out;
  out.reserve(inputs.size() + 1);
  out.emplace_back(x0.begin(), x0.end());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    try {
      out.push_back(fe_step(model, out.back(), inputs[i], h));
    } catch (const NumericError& e) {
      throw NumericError("step " + std::to_string(i) + ": " + e.what(), e.state);
    } catch (const DimensionError& e) {
      throw DimensionError("step " + std::to_string(i) + " " + e.dimension, e.expected, e.actual);
    }
  }
  return out;
}

std::vector<std::vector<ad::Var>> fe_rollout_tape(const TrainableModel& model,
                                                  std::span<const ad::Var> theta,
                                                  std::span<const double> x0,
                                                  std::span<const InputVector> inputs, double h) {
  if (x0.size() != model.state_dim()) throw DimensionError("state", model.state_dim(), x0.size());
  std::vector<std::vector<ad::Var>> out;
  out.reserve(inputs.size() + 1);
  out.emplace_back(x0.begin(), x0.end());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    if (inputs[i].size() != model.input_dim())
      throw DimensionError("step " + std::to_string(i) + " input", model.input_dim(),
                           inputs[i].size());
    const auto& x = out.back();
    const auto dx = model.rhs_tape(theta, x, inputs[i]);
    std::vector<ad::Var> next(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
      if (!std::isfinite(dx[k].value()))
        throw NumericError("step " + std::to_string(i) + ": non-finite right-hand side");
      next[k] = x[k] + h * dx[k];
    }
    out.push_back(std::move(next));
  }
  return out;
}

}  // namespace iphs::core
