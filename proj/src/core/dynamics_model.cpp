#include "iphs/core/dynamics_model.hpp"

#include "iphs/error.hpp"

namespace iphs::core {

double DynamicsModel::hamiltonian(std::span<const double>) const {
  throw CapabilityError("model does not provide a Hamiltonian");
}

std::vector<double> DynamicsModel::hamiltonian_grad(std::span<const double>) const {
  throw CapabilityError("model does not provide a Hamiltonian gradient");
}

double DynamicsModel::entropy_rate(std::span<const double>) const {
  throw CapabilityError("model does not provide an entropy production rate");
}

std::vector<Label> DynamicsModel::state_labels() const {
  std::vector<Label> out;
  for (std::size_t i = 0; i < state_dim(); ++i) out.push_back({"x" + std::to_string(i), "1"});
  return out;
}

std::vector<Label> DynamicsModel::input_labels() const {
  std::vector<Label> out;
  for (std::size_t i = 0; i < input_dim(); ++i) out.push_back({"u" + std::to_string(i), "1"});
  return out;
}

std::vector<ad::Var> TrainableModel::effective_tape(std::span<const ad::Var> theta,
                                                    std::string_view group) const {
  const auto& seg = params_.segment_info(group);
  return {theta.begin() + static_cast<std::ptrdiff_t>(seg.offset),
          theta.begin() + static_cast<std::ptrdiff_t>(seg.offset + seg.length)};
}

std::vector<double> TrainableModel::effective(std::string_view group) const {
  const std::vector<ad::Var> theta(params_.values().begin(), params_.values().end());
  std::vector<double> out;
  for (const auto& v : effective_tape(theta, group)) out.push_back(v.value());
  return out;
}

}  // namespace iphs::core
