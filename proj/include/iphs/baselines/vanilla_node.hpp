#pragma once

#include <cstdint>
#include <vector>

#include "iphs/core/dynamics_model.hpp"

namespace iphs::baselines {

/// Unconstrained neural ODE dx/dt = f_θ(x, u): two tanh hidden layers and a
/// linear output. Carries no structural physics guarantee.
///
/// Parameter groups: "W1", "b1", "W2", "b2", "W3", "b3" (row-major weights).
class VanillaNode : public core::TrainableModel {
 public:
  VanillaNode(std::size_t state_dim, std::size_t input_dim, std::size_t hidden = 32,
              std::uint64_t seed = 0, bool use_inputs = true);

  std::string kind() const override { return "vanilla-node"; }
  std::unique_ptr<core::TrainableModel> clone() const override;

  std::size_t state_dim() const noexcept override { return n_; }
  std::size_t input_dim() const noexcept override { return m_; }
  std::size_t hidden() const noexcept { return hidden_; }
  bool use_inputs() const noexcept { return use_inputs_; }

  core::StateVector rhs(std::span<const double> x, std::span<const double> u) const override;
  std::vector<ad::Var> rhs_tape(std::span<const ad::Var> theta, std::span<const ad::Var> x,
                                std::span<const double> u) const override;

  std::string default_l1_group() const override { return "W3"; }

  void set_labels(std::vector<core::Label> states, std::vector<core::Label> inputs);
  std::vector<core::Label> state_labels() const override;
  std::vector<core::Label> input_labels() const override;

 private:
  template <class S>
  std::vector<S> forward(std::span<const S> theta, std::span<const S> x,
                         std::span<const double> u) const;

  std::size_t n_, m_, hidden_;
  bool use_inputs_;
  std::vector<core::Label> state_labels_, input_labels_;
};

}  // namespace iphs::baselines
