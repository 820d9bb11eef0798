#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "iphs/ad/var.hpp"
#include "iphs/core/dynamics_model.hpp"

namespace iphs::gas {

/// Ground-truth constants of the gas-piston system. State x = [S, V, q, p].
///
/// The gas side is an ideal gas with constant specific heat; the amount of gas
/// follows from the reference state (P0, V0, T0).
struct GasPistonTruth {
  double mass = 5.0;         // piston, kg
  double alpha = 0.033;      // piston area, m²
  double beta = 1.0;         // position/velocity coupling
  double mu = 1.0;           // friction, kg/s
  double k_spring = 10.0;    // N/m
  double r_gas = 8.314;      // J/(mol·K)
  double c_v = 718.0;        // J/(kg·K)
  double molar_mass = 0.029; // kg/mol
  double p0 = 101325.0;      // Pa
  double t0 = 290.0;         // K
  double s0 = 0.0;           // J/K
  double v0 = 0.001;         // m³

  double n_mol() const { return p0 * v0 / (r_gas * t0); }
  double m_gas() const { return n_mol() * molar_mass; }
  /// m_gas·c_v, J/K.
  double heat_capacity() const { return m_gas() * c_v; }

  /// T(S, V) = T0·exp((S − S0)/(m c_v))·(V/V0)^(−nR/(m c_v)). Throws on V <= 0.
  double temperature(double s, double v) const;
  /// P = nRT/V.
  double pressure(double s, double v) const;
  /// m_gas c_v T + K q²/2 + p²/(2m).
  double total_energy(std::span<const double> x) const;

  void validate() const;
};

/// dx/dt of the true system under external force u (N).
std::array<double, 4> truth_rhs(const GasPistonTruth& params, std::span<const double> x, double u);

/// Assembles (R·J0 + J1(ĵα, ĵβ))·∂H + G·u with R = γ·∂H/∂p.
/// Both the true and the learned model reduce to this form.
template <class S>
std::array<S, 4> assemble_rhs(std::span<const S> grad_h, const S& gamma, const S& j_alpha,
                              const S& j_beta, double u) {
  const S r = gamma * grad_h[3];
  return {r * grad_h[3],
          j_alpha * grad_h[3],
          j_beta * grad_h[3],
          -(r * grad_h[0]) - j_alpha * grad_h[1] - j_beta * grad_h[2] + u};
}

/// The true system behind the generic model contract (for data generation
/// and invariant checks).
class GasPistonModel : public core::DynamicsModel {
 public:
  explicit GasPistonModel(GasPistonTruth params) : params_(params) { params_.validate(); }

  std::size_t state_dim() const noexcept override { return 4; }
  std::size_t input_dim() const noexcept override { return 1; }
  core::StateVector rhs(std::span<const double> x, std::span<const double> u) const override;

  bool has_hamiltonian() const noexcept override { return true; }
  double hamiltonian(std::span<const double> x) const override;
  /// [T, −P, K q, v]
  std::vector<double> hamiltonian_grad(std::span<const double> x) const override;

  bool has_entropy_rate() const noexcept override { return true; }
  /// μ v²/T
  double entropy_rate(std::span<const double> x) const override;

  std::vector<core::Label> state_labels() const override;
  std::vector<core::Label> input_labels() const override;

  const GasPistonTruth& params() const noexcept { return params_; }

 private:
  GasPistonTruth params_;
};

std::vector<core::Label> gas_state_labels();
std::vector<core::Label> gas_input_labels();

/// Learned gas piston: log-cosh neural Hamiltonian, sigmoid-bounded γ and
/// a J1 with known sparsity and trainable entries.
///
/// Parameter groups: "H_K" (n_h×4, row-major), "H_b" (n_h), "gamma_w" (8),
/// "gamma_b" (1), "j1" (ĵα, ĵβ).
class LearnedGasPiston : public core::TrainableModel {
 public:
  explicit LearnedGasPiston(std::size_t hidden = 16, double gamma_scale = 10.0,
                            std::uint64_t seed = 0);

  std::string kind() const override { return "gas-piston"; }
  std::unique_ptr<core::TrainableModel> clone() const override;

  std::size_t state_dim() const noexcept override { return 4; }
  std::size_t input_dim() const noexcept override { return 1; }
  std::size_t hidden() const noexcept { return hidden_; }
  double gamma_scale() const noexcept { return gamma_scale_; }

  core::StateVector rhs(std::span<const double> x, std::span<const double> u) const override;
  std::vector<ad::Var> rhs_tape(std::span<const ad::Var> theta, std::span<const ad::Var> x,
                                std::span<const double> u) const override;

  bool has_hamiltonian() const noexcept override { return true; }
  double hamiltonian(std::span<const double> x) const override;
  std::vector<double> hamiltonian_grad(std::span<const double> x) const override;

  bool has_entropy_rate() const noexcept override { return true; }
  /// γ·(∂H/∂p)²
  double entropy_rate(std::span<const double> x) const override;

  /// γ(x, ∂H/∂x) ∈ (0, gamma_scale).
  double gamma(std::span<const double> x, std::span<const double> grad_h) const;

  std::vector<core::Label> state_labels() const override { return gas_state_labels(); }
  std::vector<core::Label> input_labels() const override { return gas_input_labels(); }

  std::string default_l1_group() const override { return "j1"; }

 private:
  template <class S>
  std::vector<S> grad_h_impl(std::span<const S> theta, std::span<const S> x) const;
  template <class S>
  S gamma_impl(std::span<const S> theta, std::span<const S> x, std::span<const S> grad_h) const;
  template <class S>
  std::vector<S> rhs_impl(std::span<const S> theta, std::span<const S> x, double u) const;

  std::size_t hidden_;
  double gamma_scale_;
};

/// Σ log cosh(K x + b) for row-major K (n_h×4).
double log_cosh_hamiltonian(std::span<const double> k, std::span<const double> b,
                            std::span<const double> x);
/// Kᵀ tanh(K x + b)
std::vector<double> log_cosh_hamiltonian_grad(std::span<const double> k, std::span<const double> b,
                                              std::span<const double> x);

}  // namespace iphs::gas
