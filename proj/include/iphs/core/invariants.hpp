#pragma once

#include <span>

#include "iphs/core/dynamics_model.hpp"

namespace iphs::core {

// Checkers return residuals or rates; tolerances belong to the caller.

/// |∂H/∂xᵀ · f_internal(x)|, the power balance of the lossless part.
/// Throws CapabilityError if the model has no Hamiltonian gradient.
double check_energy_conservation(const DynamicsModel& model, std::span<const double> x);

/// Entropy production rate with inputs zeroed. Must be >= 0 for admissible models.
double check_entropy_production(const DynamicsModel& model, std::span<const double> x);

/// True iff f(x, u_hi) >= f(x, u_lo) componentwise. Requires u_lo <= u_hi.
bool check_monotonicity(const DynamicsModel& model, std::span<const double> x,
                        std::span<const double> u_lo, std::span<const double> u_hi);

}  // namespace iphs::core
