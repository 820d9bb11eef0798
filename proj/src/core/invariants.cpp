#include "iphs/core/invariants.hpp"

#include <cmath>

#include "iphs/error.hpp"

namespace iphs::core {

double check_energy_conservation(const DynamicsModel& model, std::span<const double> x) {
  if (!model.has_hamiltonian())
    throw CapabilityError("energy conservation check needs a Hamiltonian gradient");
  const auto grad = model.hamiltonian_grad(x);
  const auto flow = model.internal_rhs(x);
  double power = 0.0;
  for (std::size_t i = 0; i < flow.size(); ++i) power += grad[i] * flow[i];
  return std::fabs(power);
}

double check_entropy_production(const DynamicsModel& model, std::span<const double> x) {
  if (!model.has_entropy_rate())
    throw CapabilityError("entropy production check needs an entropy rate accessor");
  return model.entropy_rate(x);
}

bool check_monotonicity(const DynamicsModel& model, std::span<const double> x,
                        std::span<const double> u_lo, std::span<const double> u_hi) {
  if (u_lo.size() != model.input_dim()) throw DimensionError("u_lo", model.input_dim(), u_lo.size());
  if (u_hi.size() != model.input_dim()) throw DimensionError("u_hi", model.input_dim(), u_hi.size());
  for (std::size_t i = 0; i < u_lo.size(); ++i)
    if (u_lo[i] > u_hi[i]) throw Error("check_monotonicity: u_lo must not exceed u_hi");
  const auto lo = model.rhs(x, u_lo);
  const auto hi = model.rhs(x, u_hi);
  for (std::size_t i = 0; i < lo.size(); ++i)
    if (hi[i] < lo[i]) return false;
  return true;
}

}  // namespace iphs::core
