#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "iphs/baselines/arx.hpp"
#include "iphs/cli/commands.hpp"
#include "iphs/core/dynamics_model.hpp"
#include "iphs/data/dataset.hpp"

namespace iphs::cli {

/// A dataset split into chunks and then into training and validation sets.
struct Experiment {
  std::string data_path;
  data::Trajectory source;
  std::size_t chunk_len = 0;
  double train_fraction = 0.8;
  std::uint64_t seed = 0;
  data::Split split;
};

/// Reads `data`, `chunk_len`, `train_fraction` and `seed` from the config.
/// `defaults` supplies values (e.g. from a checkpoint's config echo) used
/// when the config does not set a key.
Experiment load_experiment(const Config& cfg, const std::map<std::string, std::string>& defaults = {});

/// Keys that reproduce the experiment's split.
std::map<std::string, std::string> experiment_echo(const Experiment& e);

/// A trained model of any kind, ready to predict in measurement space.
struct LoadedModel {
  std::string kind;
  std::unique_ptr<core::TrainableModel> node;
  std::optional<data::Normalizer> normalizer;
  std::optional<baselines::ArxModel> arx;
  std::map<std::string, std::string> config_echo;

  /// Rollout over the whole chunk from its first sample; ARX takes its lag
  /// history from the source series before the chunk.
  std::vector<std::vector<double>> predict(const data::Trajectory& chunk,
                                           const data::Trajectory& source) const;
  /// Chunk mapped into the model's own coordinates (normalized, if any).
  data::Trajectory to_model_space(const data::Trajectory& chunk) const;
};

LoadedModel load_model(const std::string& checkpoint_path);

std::string join_path(const std::string& dir, const std::string& file);
void ensure_dir(const std::string& dir);
void write_resolved_config(const Config& cfg, const RunContext& ctx, const std::string& command);
void warn_unused(const Config& cfg, const RunContext& ctx);

}  // namespace iphs::cli
