#include "common.hpp"

#include <filesystem>
#include <ostream>

#include "iphs/error.hpp"
#include "iphs/train/checkpoint.hpp"
#include "iphs/train/trainer.hpp"

namespace iphs::cli {

namespace {

std::string fallback_of(const std::map<std::string, std::string>& defaults, const std::string& key,
                        const std::string& otherwise) {
  const auto it = defaults.find(key);
  return it == defaults.end() ? otherwise : it->second;
}

}  // namespace

Experiment load_experiment(const Config& cfg, const std::map<std::string, std::string>& defaults) {
  Experiment e;
  e.data_path = defaults.contains("data") ? cfg.get("data", defaults.at("data")) : cfg.require("data");
  if (!std::filesystem::exists(e.data_path)) throw Error("data file '" + e.data_path + "' does not exist");
  if (cfg.has("state_columns")) {
    data::CsvSchema schema;
    auto split_cells = [](const std::string& text) {
      std::vector<std::string> out;
      std::size_t start = 0;
      while (start <= text.size()) {
        const auto pos = text.find(',', start);
        std::string cell = text.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
        const auto b = cell.find_first_not_of(" \t");
        if (b != std::string::npos) out.push_back(cell.substr(b, cell.find_last_not_of(" \t") - b + 1));
        if (pos == std::string::npos) break;
        start = pos + 1;
      }
      return out;
    };
    schema.states = split_cells(cfg.require("state_columns"));
    schema.inputs = split_cells(cfg.get("input_columns", ""));
    e.source = data::read_csv(e.data_path, schema);
  } else {
    e.source = data::read_csv(e.data_path);
  }
  const std::string len_default =
      fallback_of(defaults, "chunk_len", fallback_of(e.source.metadata, "chunk_len", "250"));
  e.chunk_len = cfg.get_count("chunk_len", static_cast<std::size_t>(data::parse_double(len_default)));
  e.train_fraction = cfg.get_double(
      "train_fraction", data::parse_double(fallback_of(defaults, "train_fraction", "0.8")));
  e.seed = cfg.has("seed") || !defaults.contains("seed")
               ? cfg.get_seed()
               : static_cast<std::uint64_t>(data::parse_double(defaults.at("seed")));
  auto chunks = data::chunk(e.source, e.chunk_len);
  if (chunks.empty())
    throw Error("data file '" + e.data_path + "' has " + std::to_string(e.source.samples()) +
                " samples, fewer than one chunk of " + std::to_string(e.chunk_len));
  e.split = data::split_chunks(std::move(chunks), e.train_fraction, e.seed);
  return e;
}

std::map<std::string, std::string> experiment_echo(const Experiment& e) {
  return {{"data", e.data_path},
          {"chunk_len", std::to_string(e.chunk_len)},
          {"train_fraction", data::format_double(e.train_fraction)},
          {"seed", std::to_string(e.seed)}};
}

data::Trajectory LoadedModel::to_model_space(const data::Trajectory& chunk) const {
  return normalizer ? normalizer->normalize(chunk) : chunk;
}

std::vector<std::vector<double>> LoadedModel::predict(const data::Trajectory& chunk,
                                                      const data::Trajectory& source) const {
  if (node) {
    const auto scaled = to_model_space(chunk);
    auto pred = train::predict(*node, scaled, chunk.h);
    if (normalizer)
      for (auto& row : pred) row = normalizer->denormalize_state(row);
    return pred;
  }
  const auto& m = *arx;
  const auto it = chunk.metadata.find("chunk_start");
  const std::size_t start = it == chunk.metadata.end() ? 0 : static_cast<std::size_t>(data::parse_double(it->second));
  // History before the series start repeats the first sample.
  std::vector<std::vector<double>> past_y, past_u;
  for (std::size_t l = m.lags; l-- > 1;) past_y.push_back(start >= l ? source.states[start - l] : source.states[0]);
  past_y.push_back(chunk.states[0]);
  for (std::size_t l = m.lags; l-- > 1;) past_u.push_back(start >= l ? source.inputs[start - l] : source.inputs[0]);
  return baselines::arx_predict(m, past_y, past_u, chunk.inputs, chunk.steps());
}

LoadedModel load_model(const std::string& checkpoint_path) {
  if (!std::filesystem::exists(checkpoint_path))
    throw Error("checkpoint '" + checkpoint_path + "' does not exist");
  LoadedModel lm;
  lm.kind = train::checkpoint_kind(checkpoint_path);
  if (lm.kind == "arx") {
    lm.arx = train::load_arx(checkpoint_path);
    const auto meta = data::read_metadata(checkpoint_path);
    for (const auto& [k, v] : meta)
      if (k.starts_with("config.")) lm.config_echo[k.substr(7)] = v;
    return lm;
  }
  const auto ckpt = train::load_checkpoint(checkpoint_path);
  lm.node = train::instantiate(ckpt);
  lm.normalizer = ckpt.normalizer;
  lm.config_echo = ckpt.config;
  return lm;
}

std::string join_path(const std::string& dir, const std::string& file) {
  return (std::filesystem::path(dir) / file).string();
}

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create run directory '" + dir + "': " + ec.message());
}

void write_resolved_config(const Config& cfg, const RunContext& ctx, const std::string& command) {
  auto meta = cfg.resolved();
  meta["command"] = command;
  data::write_metadata(join_path(ctx.out_dir, "resolved_config.txt"), meta);
}

void warn_unused(const Config& cfg, const RunContext& ctx) {
  for (const auto& k : cfg.unused()) ctx.err << "warning: config key '" << k << "' is not used\n";
}

}  // namespace iphs::cli
