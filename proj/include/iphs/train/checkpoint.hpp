#pragma once

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "iphs/ad/parameters.hpp"
#include "iphs/baselines/arx.hpp"
#include "iphs/core/dynamics_model.hpp"
#include "iphs/data/dataset.hpp"
#include "iphs/train/trainer.hpp"

namespace iphs::train {

/// Everything needed to rebuild a trained model and reproduce its run.
///
/// On disk this is a "key = value" text file: `kind`, `model.*` construction
/// keys, the segment table, the flat parameter array (17 significant digits),
/// optional `normalizer.*` statistics, the loss history, `config.*` echo and
/// the shuffle engine state.
struct Checkpoint {
  std::string kind;
  std::map<std::string, std::string> model_config;  // without the "model." prefix
  std::vector<ad::Segment> segments;
  std::vector<double> values;
  std::optional<data::Normalizer> normalizer;
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  std::map<std::string, std::string> config;  // without the "config." prefix
  std::string rng_state;
};

/// Snapshot of a model's construction keys and current parameters.
Checkpoint make_checkpoint(const core::TrainableModel& model);

/// Rebuilds the model. Throws ParseError when the kind is unknown or the
/// segment table does not match what the kind constructs.
std::unique_ptr<core::TrainableModel> instantiate(const Checkpoint& ckpt);

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

/// Columns: epoch, train_loss, val_loss, best_val_loss.
void write_history_csv(const std::string& path, std::span<const EpochRecord> history);

/// ARX models share the checkpoint file format with kind "arx".
void save_arx(const std::string& path, const baselines::ArxModel& model,
              const std::map<std::string, std::string>& config);
baselines::ArxModel load_arx(const std::string& path);

/// The `kind` key of a checkpoint file, without parsing the rest.
std::string checkpoint_kind(const std::string& path);

}  // namespace iphs::train
