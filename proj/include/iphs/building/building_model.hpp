#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "iphs/core/dynamics_model.hpp"
#include "iphs/core/skew_symmetric.hpp"
#include "iphs/data/trajectory.hpp"

namespace iphs::building {

/// Undirected zone adjacency ("shares a wall"). Edges are stored with i < j.
class Adjacency {
 public:
  Adjacency(std::size_t n_zones, std::vector<std::pair<std::size_t, std::size_t>> edges);

  std::size_t n_zones() const noexcept { return n_zones_; }
  const std::vector<std::pair<std::size_t, std::size_t>>& edges() const noexcept { return edges_; }

  /// Zones 0..n-1 in a line: (0,1), (1,2), ...
  static Adjacency chain(std::size_t n_zones);

 private:
  std::size_t n_zones_;
  std::vector<std::pair<std::size_t, std::size_t>> edges_;
};

enum class Positivity {
  Softplus,  // effective = softplus(raw), always > 0
  None,      // effective = raw; unconstrained ablation
};

/// Trainable and fixed parameters of the N-zone entropy model.
///
/// Raw values are unconstrained; the effective conductances λ and input gains
/// are softplus(raw), so every gradient iterate stays in the admissible set.
struct BuildingParams {
  Adjacency adjacency;
  std::vector<double> raw_lambda_edge;  // per edge, W/K once effective
  std::vector<double> raw_lambda_ext;   // per zone
  std::vector<double> raw_b_s;          // diagonal of B_s, per zone
  std::vector<double> raw_b_h;
  std::vector<double> raw_b_c;
  std::vector<double> heat_capacity;    // m_i c_i, J/K, fixed
  std::vector<double> t_ref;            // K
  std::vector<double> s_ref;            // J/K
  Positivity positivity = Positivity::Softplus;

  std::size_t n_zones() const noexcept { return adjacency.n_zones(); }

  /// Builds raw values so that the effective parameters equal the given ones.
  static BuildingParams from_effective(Adjacency adjacency, std::span<const double> lambda_edge,
                                       std::span<const double> lambda_ext,
                                       std::span<const double> b_s, std::span<const double> b_h,
                                       std::span<const double> b_c,
                                       std::vector<double> heat_capacity, std::vector<double> t_ref,
                                       std::vector<double> s_ref,
                                       Positivity positivity = Positivity::Softplus);

  /// Default initialisation: λ_edge = 1.0, λ_ext = 0.5, gains = 1e-3 (effective).
  static BuildingParams initial_guess(Adjacency adjacency, std::vector<double> t_ref,
                                      double heat_capacity = 1e6);

  std::vector<double> lambda_edge() const;
  std::vector<double> lambda_ext() const;
  std::vector<double> b_s() const;
  std::vector<double> b_h() const;
  std::vector<double> b_c() const;

  void validate() const;
};

/// Inputs at one instant: ambient temperature and per-zone heat gains.
struct BuildingInputs {
  double t_ext = 0.0;           // K
  std::vector<double> q_solar;  // W
  std::vector<double> q_heat;   // W
  std::vector<double> q_cool;   // W, negative when extracting heat

  /// Flat layout [T_e, Q_s..., Q_h..., Q_c...] used by the generic model contract.
  std::vector<double> flatten() const;
  static BuildingInputs unflatten(std::span<const double> u, std::size_t n_zones);
};

/// softplus⁻¹(v) = log(expm1(v)); v must be > 0.
double inverse_softplus(double v);

std::vector<double> temperature_from_entropy(const BuildingParams& p, std::span<const double> s);
std::vector<double> entropy_from_temperature(const BuildingParams& p, std::span<const double> t);

/// J̃(T) with J̃ᵢⱼ = λᵢⱼ (Tⱼ − Tᵢ)/(TᵢTⱼ) on adjacent pairs.
core::SkewSymmetricMatrix build_jtilde(const BuildingParams& p, std::span<const double> t);

/// dS/dt per zone, J/K/s.
std::vector<double> building_rhs(const BuildingParams& p, std::span<const double> s,
                                 const BuildingInputs& inputs);

struct EdgeTerm {
  std::pair<std::size_t, std::size_t> edge;
  double r;                       // R_k(T) = λᵢⱼ (Tⱼ − Tᵢ)/(TᵢTⱼ)
  core::SkewSymmetricMatrix j;    // single +1 at (i, j)
};

/// J̃(T) = Σ_k R_k(T)·J_k, one term per edge.
std::vector<EdgeTerm> decompose_jtilde(const BuildingParams& p, std::span<const double> t);

/// The model of `building_rhs` behind the generic trainable contract.
/// State is entropy; measurements (and the loss) are zone temperatures.
class BuildingModel : public core::TrainableModel {
 public:
  explicit BuildingModel(const BuildingParams& params);

  std::string kind() const override { return "building"; }
  std::unique_ptr<core::TrainableModel> clone() const override;

  std::size_t state_dim() const noexcept override { return n_; }
  std::size_t input_dim() const noexcept override { return 1 + 3 * n_; }

  core::StateVector rhs(std::span<const double> s, std::span<const double> u) const override;
  core::StateVector internal_rhs(std::span<const double> s) const override;
  std::vector<ad::Var> rhs_tape(std::span<const ad::Var> theta, std::span<const ad::Var> s,
                                std::span<const double> u) const override;

  bool has_hamiltonian() const noexcept override { return true; }
  /// Σ mᵢcᵢ Tᵢ(S), internal energy relative to absolute zero.
  double hamiltonian(std::span<const double> s) const override;
  /// ∂H/∂S = T.
  std::vector<double> hamiltonian_grad(std::span<const double> s) const override;

  bool has_entropy_rate() const noexcept override { return true; }
  /// Total entropy production Σᵢ (J̃(T)·T)ᵢ.
  double entropy_rate(std::span<const double> s) const override;

  std::vector<core::Label> state_labels() const override;
  std::vector<core::Label> input_labels() const override;
  std::vector<core::Label> output_labels() const override;

  core::StateVector encode(std::span<const double> temperatures) const override;
  std::vector<double> observe(std::span<const double> s) const override;
  std::vector<ad::Var> observe_tape(std::span<const ad::Var> theta,
                                    std::span<const ad::Var> s) const override;

  std::vector<ad::Var> effective_tape(std::span<const ad::Var> theta,
                                      std::string_view group) const override;
  std::string default_l1_group() const override { return "lambda_edge"; }
  std::vector<std::string> parameter_violations() const override;

  /// Current parameters (raw values copied from the trainable vector).
  BuildingParams building_params() const;
  const BuildingParams& config() const noexcept { return fixed_; }

 private:
  BuildingParams fixed_;  // adjacency, capacities, references, positivity
  std::size_t n_;
};

/// Synthetic excitation: daily ambient cycle with weather noise, solar gains,
/// piecewise-constant heating and cooling. Flat layout as BuildingInputs::flatten.
std::vector<core::InputVector> synth_building_inputs(std::size_t n_zones, std::size_t steps,
                                                     double h, std::uint64_t seed);

/// Simulates the true model with explicit Euler at h/substeps and emits zone
/// temperatures every h. `t0` are initial temperatures in K.
data::Trajectory synth_building_generate(const BuildingParams& truth,
                                         std::span<const core::InputVector> inputs,
                                         std::span<const double> t0, double h,
                                         std::size_t substeps = 10);

/// Parameters used as ground truth by the synthetic generator.
BuildingParams reference_building(std::size_t n_zones = 3);

}  // namespace iphs::building
