#include <ostream>

#include "common.hpp"
#include "iphs/baselines/vanilla_node.hpp"
#include "iphs/building/building_model.hpp"
#include "iphs/error.hpp"
#include "iphs/gas/gas_piston.hpp"
#include "iphs/train/checkpoint.hpp"
#include "iphs/train/trainer.hpp"

namespace iphs::cli {

namespace {

std::vector<std::string> split_names(const std::string& text) {
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
}

std::vector<std::pair<std::size_t, std::size_t>> parse_edges(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  for (const auto& cell : split_names(text)) {
    const auto dash = cell.find('-');
    if (dash == std::string::npos) throw ParseError("config key 'edges': '" + cell + "' is not of the form i-j");
    edges.emplace_back(static_cast<std::size_t>(data::parse_double(cell.substr(0, dash))),
                       static_cast<std::size_t>(data::parse_double(cell.substr(dash + 1))));
  }
  return edges;
}

std::unique_ptr<core::TrainableModel> build_model(const std::string& kind, const Config& cfg,
                                                  const data::Trajectory& source, std::uint64_t seed) {
  const std::size_t n = source.state_dim();
  const std::size_t m = source.input_dim();
  if (kind == "building") {
    if (m != 1 + 3 * n)
      throw DimensionError("building inputs [T_e, Q_s, Q_h, Q_c] for " + std::to_string(n) + " zones", 1 + 3 * n, m);
    std::string chain;
    for (std::size_t i = 0; i + 1 < n; ++i) chain += (i ? ", " : "") + std::to_string(i) + "-" + std::to_string(i + 1);
    building::Adjacency adj(n, parse_edges(cfg.get("edges", chain)));
    auto p = building::BuildingParams::initial_guess(adj, source.states.front(),
                                                     cfg.get_double("heat_capacity", 1e6));
    const std::string pos = cfg.get("positivity", "softplus");
    if (pos == "none") {
      const auto effective = p;
      p.positivity = building::Positivity::None;
      p.raw_lambda_edge = effective.lambda_edge();
      p.raw_lambda_ext = effective.lambda_ext();
      p.raw_b_s = effective.b_s();
      p.raw_b_h = effective.b_h();
      p.raw_b_c = effective.b_c();
    } else if (pos != "softplus") {
      throw ParseError("config key 'positivity' must be softplus or none, got '" + pos + "'");
    }
    return std::make_unique<building::BuildingModel>(p);
  }
  if (kind == "gas-piston") {
    if (n != 4) throw DimensionError("gas-piston state [S, V, q, p]", 4, n);
    if (m != 1) throw DimensionError("gas-piston input [F]", 1, m);
    return std::make_unique<gas::LearnedGasPiston>(cfg.get_count("hidden", 16),
                                                   cfg.get_double("gamma_scale", 10.0), seed);
  }
  if (kind == "vanilla-node") {
    auto v = std::make_unique<baselines::VanillaNode>(n, m, cfg.get_count("hidden", 32), seed,
                                                      cfg.get_bool("use_inputs", true));
    v->set_labels(source.state_labels, source.input_labels);
    return v;
  }
  throw ParseError("config key 'model' must be building, gas-piston or vanilla-node, got '" + kind + "'");
}

std::vector<data::Trajectory> apply_normalizer(const std::optional<data::Normalizer>& norm,
                                               const std::vector<data::Trajectory>& trajs) {
  if (!norm) return trajs;
  std::vector<data::Trajectory> out;
  out.reserve(trajs.size());
  for (const auto& t : trajs) out.push_back(norm->normalize(t));
  return out;
}

}  // namespace

int cmd_train(const Config& cfg, const RunContext& ctx, const std::string& forced_model) {
  const std::string kind = forced_model.empty() ? cfg.require("model") : forced_model;
  const bool is_building = kind == "building";
  const auto exp = load_experiment(cfg);
  if (exp.split.train.empty()) throw Error("training split is empty; lower chunk_len or raise train_fraction");

  std::optional<data::Normalizer> norm;
  if (cfg.get_bool("normalize", !is_building)) {
    if (is_building)
      throw ParseError("config key 'normalize' must be false for the building model (states are temperatures)");
    norm = data::Normalizer::fit(exp.split.train);
  }
  auto model = build_model(kind, cfg, exp.source, exp.seed);

  train::TrainConfig tc;
  tc.h = exp.source.h;
  tc.epochs = static_cast<int>(cfg.get_count("epochs", 200));
  tc.learning_rate = cfg.get_double("learning_rate", is_building ? 1e-2 : 1e-3);
  tc.batch_size = cfg.get_count("batch_size", 8);
  tc.l1_weight = cfg.get_double("l1_weight", 0.0);
  tc.l1_groups = split_names(cfg.get("l1_groups", model->default_l1_group()));
  tc.seed = exp.seed;
  tc.gradient_clip = cfg.get_optional_double("gradient_clip");
  const std::string space = cfg.get("loss_space", is_building ? "temperature" : "state");
  if (space == "temperature" || space == "observed") tc.loss_space = train::LossSpace::Observed;
  else if (space == "state") tc.loss_space = train::LossSpace::State;
  else throw ParseError("config key 'loss_space' must be temperature or state, got '" + space + "'");
  if (!(tc.learning_rate > 0.0)) throw ParseError("config key 'learning_rate' must be positive");
  if (tc.batch_size == 0) throw ParseError("config key 'batch_size' must be positive");
  if (tc.l1_weight < 0.0) throw ParseError("config key 'l1_weight' must be non-negative");

  const auto train_set = apply_normalizer(norm, exp.split.train);
  const auto val_set = apply_normalizer(norm, exp.split.validation);
  const auto result = train::train(*model, train_set, val_set.empty() ? train_set : val_set, tc);

  ensure_dir(ctx.out_dir);
  auto ckpt = train::make_checkpoint(*model);
  ckpt.normalizer = norm;
  ckpt.history = result.history;
  ckpt.best_epoch = result.best_epoch;
  ckpt.config = cfg.resolved();
  ckpt.config["model"] = kind;
  ckpt.rng_state = result.rng_state;
  train::save_checkpoint(join_path(ctx.out_dir, "checkpoint.txt"), ckpt);
  train::write_history_csv(join_path(ctx.out_dir, "loss_history.csv"), result.history);
  write_resolved_config(cfg, ctx, forced_model.empty() ? "train" : "baseline-node");
  warn_unused(cfg, ctx);

  const auto& best = result.history.at(static_cast<std::size_t>(result.best_epoch));
  ctx.out << kind << ": " << exp.split.train.size() << " training / " << exp.split.validation.size()
          << " validation chunks, best epoch " << result.best_epoch << ", validation loss "
          << data::format_double(best.val_loss) << '\n';
  if (is_building)
    ctx.out << "effective lambda_edge = " << data::format_double_list(model->effective("lambda_edge"))
            << "\neffective lambda_ext = " << data::format_double_list(model->effective("lambda_ext")) << '\n';
  if (result.diverged) {
    ctx.err << "error: training diverged: " << result.message << " (best checkpoint kept)\n";
    return kNumeric;
  }
  return kOk;
}

int cmd_baseline_arx(const Config& cfg, const RunContext& ctx) {
  const auto exp = load_experiment(cfg);
  const std::size_t lags = cfg.get_count("lags", 12);
  if (lags == 0) throw ParseError("config key 'lags' must be positive");
  if (exp.split.train.empty()) throw Error("training split is empty; lower chunk_len or raise train_fraction");
  const auto model = baselines::arx_fit(exp.split.train, lags);
  const double residual = baselines::arx_residual(model, exp.split.train);

  ensure_dir(ctx.out_dir);
  train::save_arx(join_path(ctx.out_dir, "checkpoint.txt"), model, cfg.resolved());
  write_resolved_config(cfg, ctx, "baseline-arx");
  warn_unused(cfg, ctx);
  ctx.out << "arx: " << lags << " lags, " << exp.split.train.size() << " training chunks, residual "
          << data::format_double(residual) << '\n';
  if (model.rank_deficient)
    ctx.err << "warning: ARX regressor is rank-deficient; minimum-norm solution returned\n";
  return kOk;
}

}  // namespace iphs::cli
