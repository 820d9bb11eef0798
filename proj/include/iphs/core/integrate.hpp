#pragma once

#include <span>
#include <vector>

#include "iphs/core/dynamics_model.hpp"

namespace iphs::core {

/// One explicit Euler step x + h·f(x, u).
///
/// Throws DimensionError on mismatched lengths and NumericError (carrying x)
/// when the state or the right-hand side is not finite.
StateVector fe_step(const DynamicsModel& model, std::span<const double> x,
                    std::span<const double> u, double h);

/// Iterates fe_step over `inputs`, returning L+1 states starting with x0.
/// Errors are rethrown with the failing step index.
std::vector<StateVector> fe_rollout(const DynamicsModel& model, std::span<const double> x0,
                                    std::span<const InputVector> inputs, double h);

/// Tape version of the same recursion used for BPTT.
std::vector<std::vector<ad::Var>> fe_rollout_tape(const TrainableModel& model,
                                                  std::span<const ad::Var> theta,
                                                  std::span<const double> x0,
                                                  std::span<const InputVector> inputs, double h);

}  // namespace iphs::core
