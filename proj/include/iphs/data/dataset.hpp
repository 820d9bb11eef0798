#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "iphs/core/dynamics_model.hpp"
#include "iphs/data/trajectory.hpp"

namespace iphs::data {

using InputFunction = std::function<core::InputVector(double t)>;

/// Classic fourth-order Runge-Kutta from x0, recording `steps` steps of size h
/// (steps + 1 samples). Each recorded step is split into `substeps` equal RK4
/// steps; the input function is evaluated at the stage times. The recorded
/// input at sample k is u(t_k).
///
/// Aborts with NumericError (naming the step) when ||x|| exceeds 1e12 or
/// becomes non-finite.
Trajectory rk4_generate(const core::DynamicsModel& model, std::span<const double> x0,
                        const InputFunction& input, double h, std::size_t steps,
                        std::size_t substeps = 1);

/// Adds N(0, (factor·σ_d)²) to every state dimension d, where σ_d is the
/// sample standard deviation of that dimension. Inputs are untouched.
Trajectory add_noise(const Trajectory& traj, double factor, std::uint64_t seed);

/// Consecutive windows of `len` samples (len − 1 steps). Neighbouring windows
/// share their boundary sample and a trailing partial window is dropped.
/// Each chunk records its first sample index in metadata["chunk_start"].
std::vector<Trajectory> chunk(const Trajectory& traj, std::size_t len);

struct Split {
  std::vector<Trajectory> train;
  std::vector<Trajectory> validation;
};

/// Seeded shuffle of whole chunks, then floor(train_fraction·n) to training.
Split split_chunks(std::vector<Trajectory> chunks, double train_fraction, std::uint64_t seed);

/// Per-dimension z-score statistics for states and inputs.
struct Normalizer {
  std::vector<double> state_mean, state_std;
  std::vector<double> input_mean, input_std;
  std::vector<bool> state_degenerate, input_degenerate;

  /// Fit on the given (training) trajectories. Constant dimensions are
  /// flagged and pass through unchanged (mean 0, std 1).
  static Normalizer fit(std::span<const Trajectory> trajs);
  /// Identity transform for the given dimensions.
  static Normalizer identity(std::size_t n, std::size_t m);

  Trajectory normalize(const Trajectory& traj) const;
  Trajectory denormalize(const Trajectory& traj) const;
  std::vector<double> normalize_state(std::span<const double> x) const;
  std::vector<double> denormalize_state(std::span<const double> x) const;
  std::vector<double> normalize_input(std::span<const double> u) const;
  std::vector<double> denormalize_input(std::span<const double> u) const;

  /// Flat "key = value" representation with the given prefix.
  void to_metadata(std::map<std::string, std::string>& meta, const std::string& prefix = "normalizer.") const;
  static Normalizer from_metadata(const std::map<std::string, std::string>& meta,
                                  const std::string& prefix = "normalizer.");
};

/// Column names (with unit suffix, e.g. "T_zone1[K]") for states and inputs.
struct CsvSchema {
  std::vector<std::string> states;
  std::vector<std::string> inputs;
};

/// Writes `t[s]`, state and input columns at 17 significant digits. The last
/// row has no input (L inputs for L + 1 samples) and its input cells are empty.
void write_csv(const std::string& path, const Trajectory& traj);

/// Reads a trajectory. Every header cell must carry a unit suffix; columns are
/// located by name so their order is free and unknown columns are ignored.
/// Throws ParseError with the 1-based line number on malformed input.
Trajectory read_csv(const std::string& path, const CsvSchema& schema);

/// Reads using the column lists stored in the sidecar metadata file, and
/// loads that metadata into the trajectory.
Trajectory read_csv(const std::string& path);

/// write_csv plus a sidecar holding traj.metadata and the column lists.
void write_dataset(const std::string& csv_path, const Trajectory& traj);

/// Sidecar path: same basename with a ".meta" extension.
std::string metadata_path(const std::string& csv_path);

/// "T_zone1[K]" -> {"T_zone1", "K"}. Throws ParseError without a unit suffix.
core::Label parse_label(std::string_view header);

std::map<std::string, std::string> read_metadata(const std::string& path);
void write_metadata(const std::string& path, const std::map<std::string, std::string>& meta);

/// Number formatting shared by every text format (17 significant digits).
std::string format_double(double v);
double parse_double(std::string_view text, std::size_t line = 0);
std::vector<double> parse_double_list(std::string_view text, std::size_t line = 0);
std::string format_double_list(std::span<const double> v);

}  // namespace iphs::data
