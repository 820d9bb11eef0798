#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "iphs/ad/parameters.hpp"
#include "iphs/ad/var.hpp"

namespace iphs::core {

/// Per-dimension name and unit, e.g. {"S", "J/K"}. Rendered as `S[J/K]`.
struct Label {
  std::string name;
  std::string unit;

  std::string header() const { return name + "[" + unit + "]"; }
};

using StateVector = std::vector<double>;
using InputVector = std::vector<double>;

/// Time-invariant continuous dynamics dx/dt = f(x, u).
///
/// Port-Hamiltonian models additionally expose H, ∂H/∂x and the entropy
/// production rate. `internal_rhs` is the flow with every exogenous port
/// disconnected (W ≡ 0, u ≡ 0), which is what the energy and entropy
/// identities are stated for.
class DynamicsModel {
 public:
  virtual ~DynamicsModel() = default;

  virtual std::size_t state_dim() const noexcept = 0;
  virtual std::size_t input_dim() const noexcept = 0;

  virtual StateVector rhs(std::span<const double> x, std::span<const double> u) const = 0;

  virtual StateVector internal_rhs(std::span<const double> x) const {
    const InputVector zero(input_dim(), 0.0);
    return rhs(x, zero);
  }

  virtual bool has_hamiltonian() const noexcept { return false; }
  virtual double hamiltonian(std::span<const double> x) const;
  virtual std::vector<double> hamiltonian_grad(std::span<const double> x) const;

  virtual bool has_entropy_rate() const noexcept { return false; }
  /// Entropy production rate with exogenous inputs zeroed.
  virtual double entropy_rate(std::span<const double> x) const;

  virtual std::vector<Label> state_labels() const;
  virtual std::vector<Label> input_labels() const;
};

/// A DynamicsModel with a flat trainable parameter vector whose right-hand
/// side can also be recorded on an autodiff tape.
///
/// Measured data may live in a different space from the state (the building
/// model evolves entropy but measures temperature): `encode` maps a
/// measurement to a state and `observe` maps a state back.
class TrainableModel : public DynamicsModel {
 public:
  /// Short identifier written into checkpoints: "building", "gas-piston", ...
  virtual std::string kind() const = 0;
  virtual std::unique_ptr<TrainableModel> clone() const = 0;

  ad::ParameterVector& parameters() noexcept { return params_; }
  const ad::ParameterVector& parameters() const noexcept { return params_; }

  /// Right-hand side recorded on the tape, with `theta` laid out like parameters().
  virtual std::vector<ad::Var> rhs_tape(std::span<const ad::Var> theta,
                                        std::span<const ad::Var> x,
                                        std::span<const double> u) const = 0;

  virtual std::size_t output_dim() const noexcept { return state_dim(); }
  virtual StateVector encode(std::span<const double> z) const { return {z.begin(), z.end()}; }
  virtual std::vector<double> observe(std::span<const double> x) const {
    return {x.begin(), x.end()};
  }
  virtual std::vector<ad::Var> observe_tape(std::span<const ad::Var> /*theta*/,
                                            std::span<const ad::Var> x) const {
    return {x.begin(), x.end()};
  }
  virtual std::vector<Label> output_labels() const { return state_labels(); }

  /// Post-reparametrisation values of a parameter group (identity by default).
  virtual std::vector<ad::Var> effective_tape(std::span<const ad::Var> theta,
                                              std::string_view group) const;
  std::vector<double> effective(std::string_view group) const;

  /// Group penalised by the sparsity term when none is configured.
  virtual std::string default_l1_group() const = 0;

  /// Human-readable violations of the parameter-level sufficient conditions
  /// for physical consistency, each naming the offending parameter.
  virtual std::vector<std::string> parameter_violations() const { return {}; }

 protected:
  ad::ParameterVector params_;
};

}  // namespace iphs::core
