#include "iphs/train/checkpoint.hpp"

#include <fstream>

#include "iphs/baselines/vanilla_node.hpp"
#include "iphs/building/building_model.hpp"
#include "iphs/error.hpp"
#include "iphs/gas/gas_piston.hpp"

namespace iphs::train {

namespace {

using Meta = std::map<std::string, std::string>;

const std::string& require(const Meta& meta, const std::string& key, const std::string& where) {
  const auto it = meta.find(key);
  if (it == meta.end()) throw ParseError(where + " lacks '" + key + "'");
  return it->second;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = text.find(',', start);
    std::string cell = text.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
    const auto b = cell.find_first_not_of(" \t");
    const auto e = cell.find_last_not_of(" \t");
    cell = b == std::string::npos ? "" : cell.substr(b, e - b + 1);
    if (!cell.empty()) out.push_back(cell);
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string join_list(const std::vector<std::string>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + v[i];
  return out;
}

std::size_t parse_count(const std::string& text, const std::string& key) {
  const double v = data::parse_double(text);
  if (v < 0 || v != static_cast<double>(static_cast<std::size_t>(v)))
    throw ParseError("'" + key + "' must be a non-negative integer, got '" + text + "'");
  return static_cast<std::size_t>(v);
}

std::string format_edges(const building::Adjacency& adj) {
  std::vector<std::string> cells;
  for (const auto& [i, j] : adj.edges()) cells.push_back(std::to_string(i) + "-" + std::to_string(j));
  return join_list(cells);
}

std::vector<std::pair<std::size_t, std::size_t>> parse_edges(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& cell : split_list(text)) {
    const auto dash = cell.find('-');
    if (dash == std::string::npos) throw ParseError("edge '" + cell + "' is not of the form i-j");
    edges.emplace_back(parse_count(cell.substr(0, dash), "edges"),
                       parse_count(cell.substr(dash + 1), "edges"));
  }
  return edges;
}

std::vector<std::string> label_headers(const std::vector<core::Label>& labels) {
  std::vector<std::string> out;
  for (const auto& l : labels) out.push_back(l.header());
  return out;
}

std::vector<core::Label> parse_labels(const std::string& text) {
  std::vector<core::Label> out;
  for (const auto& cell : split_list(text)) out.push_back(data::parse_label(cell));
  return out;
}

Meta model_config(const core::TrainableModel& model) {
  Meta cfg;
  if (const auto* b = dynamic_cast<const building::BuildingModel*>(&model)) {
    const auto& p = b->config();
    cfg["zones"] = std::to_string(p.n_zones());
    cfg["edges"] = format_edges(p.adjacency);
    cfg["heat_capacity"] = data::format_double_list(p.heat_capacity);
    cfg["t_ref"] = data::format_double_list(p.t_ref);
    cfg["s_ref"] = data::format_double_list(p.s_ref);
    cfg["positivity"] = p.positivity == building::Positivity::Softplus ? "softplus" : "none";
  } else if (const auto* g = dynamic_cast<const gas::LearnedGasPiston*>(&model)) {
    cfg["hidden"] = std::to_string(g->hidden());
    cfg["gamma_scale"] = data::format_double(g->gamma_scale());
  } else if (const auto* v = dynamic_cast<const baselines::VanillaNode*>(&model)) {
    cfg["state_dim"] = std::to_string(v->state_dim());
    cfg["input_dim"] = std::to_string(v->input_dim());
    cfg["hidden"] = std::to_string(v->hidden());
    cfg["use_inputs"] = v->use_inputs() ? "true" : "false";
    cfg["state_labels"] = join_list(label_headers(v->state_labels()));
    cfg["input_labels"] = join_list(label_headers(v->input_labels()));
  } else {
    throw Error("no checkpoint support for model kind '" + model.kind() + "'");
  }
  return cfg;
}

std::string format_segments(const std::vector<ad::Segment>& segments) {
  std::vector<std::string> cells;
  for (const auto& s : segments) cells.push_back(s.name + ":" + std::to_string(s.length));
  return join_list(cells);
}

std::vector<ad::Segment> parse_segments(const std::string& text) {
  std::vector<ad::Segment> out;
  std::size_t offset = 0;
  for (const auto& cell : split_list(text)) {
    const auto colon = cell.find(':');
    if (colon == std::string::npos) throw ParseError("segment '" + cell + "' is not of the form name:length");
    const std::size_t len = parse_count(cell.substr(colon + 1), "segments");
    out.push_back({cell.substr(0, colon), offset, len});
    offset += len;
  }
  return out;
}

void put_prefixed(Meta& meta, const std::string& prefix, const Meta& values) {
  for (const auto& [k, v] : values) meta[prefix + k] = v;
}

Meta take_prefixed(const Meta& meta, const std::string& prefix) {
  Meta out;
  for (auto it = meta.lower_bound(prefix); it != meta.end() && it->first.starts_with(prefix); ++it)
    out[it->first.substr(prefix.size())] = it->second;
  return out;
}

bool parse_bool(const std::string& text) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ParseError("expected true or false, got '" + text + "'");
}

}  // namespace

Checkpoint make_checkpoint(const core::TrainableModel& model) {
  Checkpoint c;
  c.kind = model.kind();
  c.model_config = model_config(model);
  c.segments = model.parameters().segments();
  c.values = model.parameters().values();
  return c;
}

std::unique_ptr<core::TrainableModel> instantiate(const Checkpoint& ckpt) {
  const auto& cfg = ckpt.model_config;
  const std::string where = "checkpoint model config";
  std::unique_ptr<core::TrainableModel> model;
  if (ckpt.kind == "building") {
    const std::size_t n = parse_count(require(cfg, "zones", where), "zones");
    building::Adjacency adj(n, parse_edges(require(cfg, "edges", where)));
    auto p = building::BuildingParams::initial_guess(adj, data::parse_double_list(require(cfg, "t_ref", where)));
    p.heat_capacity = data::parse_double_list(require(cfg, "heat_capacity", where));
    p.s_ref = data::parse_double_list(require(cfg, "s_ref", where));
    const auto& pos = require(cfg, "positivity", where);
    if (pos == "softplus") p.positivity = building::Positivity::Softplus;
    else if (pos == "none") p.positivity = building::Positivity::None;
    else throw ParseError("unknown positivity '" + pos + "'");
    model = std::make_unique<building::BuildingModel>(p);
  } else if (ckpt.kind == "gas-piston") {
    model = std::make_unique<gas::LearnedGasPiston>(
        parse_count(require(cfg, "hidden", where), "hidden"),
        data::parse_double(require(cfg, "gamma_scale", where)));
  } else if (ckpt.kind == "vanilla-node") {
    auto v = std::make_unique<baselines::VanillaNode>(
        parse_count(require(cfg, "state_dim", where), "state_dim"),
        parse_count(require(cfg, "input_dim", where), "input_dim"),
        parse_count(require(cfg, "hidden", where), "hidden"), 0,
        parse_bool(require(cfg, "use_inputs", where)));
    v->set_labels(parse_labels(require(cfg, "state_labels", where)),
                  parse_labels(require(cfg, "input_labels", where)));
    model = std::move(v);
  } else {
    throw ParseError("unknown model kind '" + ckpt.kind + "'");
  }

  const auto& expected = model->parameters().segments();
  if (expected.size() != ckpt.segments.size())
    throw ParseError("checkpoint has " + std::to_string(ckpt.segments.size()) +
                     " parameter segments, model '" + ckpt.kind + "' expects " +
                     std::to_string(expected.size()));
  for (std::size_t i = 0; i < expected.size(); ++i) {
    if (expected[i].name != ckpt.segments[i].name || expected[i].length != ckpt.segments[i].length)
      throw ParseError("checkpoint segment '" + ckpt.segments[i].name + ":" +
                       std::to_string(ckpt.segments[i].length) + "' does not match '" +
                       expected[i].name + ":" + std::to_string(expected[i].length) + "'");
  }
  if (ckpt.values.size() != model->parameters().size())
    throw ParseError("checkpoint holds " + std::to_string(ckpt.values.size()) +
                     " parameter values, segments describe " +
                     std::to_string(model->parameters().size()));
  model->parameters().assign(ckpt.values);
  return model;
}

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  Meta meta;
  meta["kind"] = ckpt.kind;
  put_prefixed(meta, "model.", ckpt.model_config);
  meta["segments"] = format_segments(ckpt.segments);
  meta["params"] = data::format_double_list(ckpt.values);
  if (ckpt.normalizer) ckpt.normalizer->to_metadata(meta);
  std::vector<double> epoch, train, val, best;
  for (const auto& r : ckpt.history) {
    epoch.push_back(r.epoch);
    train.push_back(r.train_loss);
    val.push_back(r.val_loss);
    best.push_back(r.best_val_loss);
  }
  meta["history.epoch"] = data::format_double_list(epoch);
  meta["history.train_loss"] = data::format_double_list(train);
  meta["history.val_loss"] = data::format_double_list(val);
  meta["history.best_val_loss"] = data::format_double_list(best);
  meta["best_epoch"] = std::to_string(ckpt.best_epoch);
  put_prefixed(meta, "config.", ckpt.config);
  meta["rng_state"] = ckpt.rng_state;
  data::write_metadata(path, meta);
}

Checkpoint load_checkpoint(const std::string& path) {
  const auto meta = data::read_metadata(path);
  const std::string where = "checkpoint '" + path + "'";
  Checkpoint c;
  c.kind = require(meta, "kind", where);
  c.model_config = take_prefixed(meta, "model.");
  c.segments = parse_segments(require(meta, "segments", where));
  c.values = data::parse_double_list(require(meta, "params", where));
  if (meta.contains("normalizer.state_mean")) c.normalizer = data::Normalizer::from_metadata(meta);
  if (meta.contains("history.epoch")) {
    const auto epoch = data::parse_double_list(meta.at("history.epoch"));
    const auto train = data::parse_double_list(require(meta, "history.train_loss", where));
    const auto val = data::parse_double_list(require(meta, "history.val_loss", where));
    const auto best = data::parse_double_list(require(meta, "history.best_val_loss", where));
    if (train.size() != epoch.size() || val.size() != epoch.size() || best.size() != epoch.size())
      throw ParseError(where + " has history lists of unequal length");
    for (std::size_t i = 0; i < epoch.size(); ++i)
      c.history.push_back({static_cast<int>(epoch[i]), train[i], val[i], best[i]});
  }
  if (meta.contains("best_epoch")) c.best_epoch = static_cast<int>(parse_count(meta.at("best_epoch"), "best_epoch"));
  c.config = take_prefixed(meta, "config.");
  if (meta.contains("rng_state")) c.rng_state = meta.at("rng_state");
  return c;
}

void write_history_csv(const std::string& path, std::span<const EpochRecord> history) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << "epoch,train_loss,val_loss,best_val_loss\n";
  for (const auto& r : history)
    out << r.epoch << ',' << data::format_double(r.train_loss) << ','
        << data::format_double(r.val_loss) << ',' << data::format_double(r.best_val_loss) << '\n';
  if (!out) throw Error("failed writing '" + path + "'");
}

void save_arx(const std::string& path, const baselines::ArxModel& model, const Meta& config) {
  Meta meta;
  meta["kind"] = "arx";
  meta["model.lags"] = std::to_string(model.lags);
  meta["model.n_out"] = std::to_string(model.n_out);
  meta["model.n_in"] = std::to_string(model.n_in);
  meta["model.rank_deficient"] = model.rank_deficient ? "true" : "false";
  meta["params"] = data::format_double_list(model.coef);
  put_prefixed(meta, "config.", config);
  data::write_metadata(path, meta);
}

baselines::ArxModel load_arx(const std::string& path) {
  const auto meta = data::read_metadata(path);
  const std::string where = "ARX checkpoint '" + path + "'";
  if (require(meta, "kind", where) != "arx") throw ParseError(where + " is not of kind 'arx'");
  baselines::ArxModel m;
  m.lags = parse_count(require(meta, "model.lags", where), "lags");
  m.n_out = parse_count(require(meta, "model.n_out", where), "n_out");
  m.n_in = parse_count(require(meta, "model.n_in", where), "n_in");
  m.rank_deficient = parse_bool(require(meta, "model.rank_deficient", where));
  m.coef = data::parse_double_list(require(meta, "params", where));
  if (m.lags == 0) throw ParseError(where + ": lags must be positive");
  if (m.coef.size() != m.n_out * m.regressor_dim())
    throw ParseError(where + " holds " + std::to_string(m.coef.size()) + " coefficients, expected " +
                     std::to_string(m.n_out * m.regressor_dim()));
  return m;
}

std::string checkpoint_kind(const std::string& path) {
  return require(data::read_metadata(path), "kind", "checkpoint '" + path + "'");
}

}  // namespace iphs::train
