#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>

#include "common.hpp"
#include "iphs/core/invariants.hpp"
#include "iphs/error.hpp"

namespace iphs::cli {

namespace {

const std::vector<data::Trajectory>& pick_split(const Experiment& exp, const std::string& which) {
  if (which == "validation") return exp.split.validation;
  if (which == "train") return exp.split.train;
  throw ParseError("config key 'split' must be validation or train, got '" + which + "'");
}

std::size_t chunk_start(const data::Trajectory& c) {
  const auto it = c.metadata.find("chunk_start");
  return it == c.metadata.end() ? 0 : static_cast<std::size_t>(data::parse_double(it->second));
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  return out;
}

/// step,mae rows of a metrics_per_step.csv file.
std::vector<double> read_per_step(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line != "step,mae") throw ParseError("'" + path + "' does not start with 'step,mae'", 1);
  std::vector<double> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ParseError("expected 'step,mae'", line_no);
    out.push_back(data::parse_double(line.substr(comma + 1), line_no));
  }
  return out;
}

double mean_over_horizon(const std::vector<double>& mae) {
  if (mae.size() < 2) return 0.0;
  double s = 0.0;
  for (std::size_t k = 1; k < mae.size(); ++k) s += mae[k];
  return s / static_cast<double>(mae.size() - 1);
}

double improvement_pct(double self, double other) {
  if (other == 0.0) return self == 0.0 ? 0.0 : -std::numeric_limits<double>::infinity();
  return (other - self) / other * 100.0;
}

}  // namespace

int cmd_evaluate(const Config& cfg, const RunContext& ctx) {
  const std::string ckpt_path = cfg.require("checkpoint");
  const auto lm = load_model(ckpt_path);
  const auto exp = load_experiment(cfg, lm.config_echo);
  const auto& chunks = pick_split(exp, cfg.get("split", "validation"));
  const std::string series = cfg.get("label", lm.kind);
  if (chunks.empty()) throw Error("no chunks in the requested split");
  // Optional noise-free series of the same shape: predictions still start
  // from the measurements, errors are taken against the reference.
  const std::string reference_path = cfg.get("reference", "");
  std::optional<data::Trajectory> reference;
  if (!reference_path.empty()) {
    reference = data::read_csv(reference_path);
    if (reference->samples() != exp.source.samples() || reference->state_dim() != exp.source.state_dim())
      throw DimensionError("reference samples", exp.source.samples(), reference->samples());
  }

  ensure_dir(ctx.out_dir);
  auto pred_out = open_out(join_path(ctx.out_dir, "predictions.csv"));
  pred_out << "chunk,step,dim,predicted,target\n";
  const std::size_t steps = chunks.front().steps();
  std::vector<double> mae(steps + 1, 0.0);
  for (const auto& c : chunks) {
    const auto pred = lm.predict(c, exp.source);
    const std::size_t start = chunk_start(c);
    const std::size_t n = c.state_dim();
    for (std::size_t k = 0; k <= steps; ++k) {
      double err = 0.0;
      for (std::size_t d = 0; d < n; ++d) {
        if (!std::isfinite(pred[k][d]))
          throw NumericError("non-finite prediction at step " + std::to_string(k) + " of chunk " +
                             std::to_string(start), pred[k]);
        const double target = reference ? reference->states[start + k][d] : c.states[k][d];
        err += std::abs(pred[k][d] - target);
        pred_out << start << ',' << k << ',' << d << ',' << data::format_double(pred[k][d]) << ','
                 << data::format_double(target) << '\n';
      }
      mae[k] += err / static_cast<double>(n);
    }
  }
  for (auto& v : mae) v /= static_cast<double>(chunks.size());

  {
    auto out = open_out(join_path(ctx.out_dir, "metrics_per_step.csv"));
    out << "step,mae\n";
    for (std::size_t k = 0; k < mae.size(); ++k) out << k << ',' << data::format_double(mae[k]) << '\n';
  }
  std::map<std::string, std::string> summary{
      {"series", series},
      {"chunks", std::to_string(chunks.size())},
      {"horizon", std::to_string(steps)},
      {"mean_mae", data::format_double(mean_over_horizon(mae))},
      {"end_mae", data::format_double(mae.back())},
      {"target", reference ? "reference " + reference_path : "measured"},
  };
  auto plot = open_out(join_path(ctx.out_dir, "plot_mae.csv"));
  plot << "step,series,value\n";
  for (std::size_t k = 0; k < mae.size(); ++k) plot << k << ',' << series << ',' << data::format_double(mae[k]) << '\n';

  const std::string compare = cfg.get("compare", "");
  if (!compare.empty()) {
    const auto other_summary = data::read_metadata(join_path(compare, "metrics_summary.txt"));
    const auto other = read_per_step(join_path(compare, "metrics_per_step.csv"));
    const std::string other_series = other_summary.contains("series") ? other_summary.at("series") : "compare";
    for (std::size_t k = 0; k < other.size(); ++k)
      plot << k << ',' << other_series << ',' << data::format_double(other[k]) << '\n';
    const double om = mean_over_horizon(other), oe = other.empty() ? 0.0 : other.back();
    summary["compare_series"] = other_series;
    summary["compare_mean_mae"] = data::format_double(om);
    summary["compare_end_mae"] = data::format_double(oe);
    summary["improvement_mean_pct"] = data::format_double(improvement_pct(mean_over_horizon(mae), om));
    summary["improvement_end_pct"] = data::format_double(improvement_pct(mae.back(), oe));
  }
  if (!plot) throw Error("failed writing plot data");
  data::write_metadata(join_path(ctx.out_dir, "metrics_summary.txt"), summary);
  write_resolved_config(cfg, ctx, "evaluate");
  warn_unused(cfg, ctx);
  for (const auto& [k, v] : summary) ctx.out << k << " = " << v << '\n';
  return kOk;
}

int cmd_check_physics(const Config& cfg, const RunContext& ctx) {
  const std::string ckpt_path = cfg.require("checkpoint");
  const auto lm = load_model(ckpt_path);
  std::ostringstream report;
  report << "model = " << lm.kind << '\n';
  ensure_dir(ctx.out_dir);
  if (!lm.node) {
    report << "status = not applicable (no physics structure)\n";
    std::ofstream(join_path(ctx.out_dir, "physics_report.txt")) << report.str();
    ctx.out << report.str();
    write_resolved_config(cfg, ctx, "check-physics");
    return kOk;
  }
  const auto& model = *lm.node;
  const auto exp = load_experiment(cfg, lm.config_echo);
  const auto& chunks = pick_split(exp, cfg.get("split", "validation"));
  const double energy_tol = cfg.get_double("energy_tol", 1e-9);
  const double entropy_tol = cfg.get_double("entropy_tol", 1e-12);
  std::size_t violations = 0;

  const auto param_issues = model.parameter_violations();
  report << "parameters = " << (param_issues.empty() ? "pass" : "fail") << '\n';
  for (const auto& p : param_issues) report << "parameter violation: " << p << '\n';
  violations += param_issues.size();

  double worst_energy = 0.0, min_rate = std::numeric_limits<double>::infinity();
  std::size_t energy_fail = 0, entropy_fail = 0, mono_fail = 0, states = 0;
  const bool monotone_check = lm.kind == "building";
  for (const auto& c : chunks) {
    const auto scaled = lm.to_model_space(c);
    for (std::size_t k = 0; k < scaled.samples(); ++k) {
      const auto x = model.encode(scaled.states[k]);
      ++states;
      if (model.has_hamiltonian()) {
        const auto g = model.hamiltonian_grad(x);
        const auto f = model.internal_rhs(x);
        double scale = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) scale += std::abs(g[i] * f[i]);
        const double r = core::check_energy_conservation(model, x);
        const double rel = scale > 0.0 ? r / scale : r;
        worst_energy = std::max(worst_energy, rel);
        if (!(rel <= energy_tol)) ++energy_fail;
      }
      if (model.has_entropy_rate()) {
        const double rate = core::check_entropy_production(model, x);
        min_rate = std::min(min_rate, rate);
        if (!(rate >= -entropy_tol)) ++entropy_fail;
      }
      if (monotone_check && k < scaled.steps()) {
        const std::size_t n = model.state_dim();
        for (std::size_t zone = 0; zone < n; ++zone) {
          auto hi = scaled.inputs[k];
          hi[1 + n + zone] += 1000.0;
          if (!core::check_monotonicity(model, x, scaled.inputs[k], hi)) ++mono_fail;
        }
      }
    }
  }
  if (model.has_hamiltonian())
    report << "energy conservation = " << (energy_fail ? "fail" : "pass") << " (max relative residual "
           << data::format_double(worst_energy) << " over " << states << " states, " << energy_fail
           << " above " << data::format_double(energy_tol) << ")\n";
  else
    report << "energy conservation = not available (no Hamiltonian)\n";
  if (model.has_entropy_rate())
    report << "entropy production = " << (entropy_fail ? "fail" : "pass") << " (min rate "
           << data::format_double(min_rate) << ", " << entropy_fail << " states below "
           << data::format_double(-entropy_tol) << ")\n";
  else
    report << "entropy production = not guaranteed (no structural entropy term)\n";
  if (monotone_check)
    report << "monotonicity = " << (mono_fail ? "fail" : "pass") << " (" << mono_fail << " failures)\n";
  violations += energy_fail + entropy_fail + mono_fail;

  const auto labels = model.output_labels();
  std::size_t s_col = labels.size();
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i].name == "S") s_col = i;
  if (s_col < labels.size()) {
    std::size_t decreases = 0, total = 0;
    for (const auto& c : chunks) {
      const auto pred = lm.predict(c, exp.source);
      for (std::size_t k = 0; k + 1 < pred.size(); ++k, ++total)
        if (pred[k + 1][s_col] < pred[k][s_col]) ++decreases;
    }
    report << "entropy decrease steps = " << decreases << " of " << total << " over " << chunks.size()
           << " chunks";
    if (!model.has_entropy_rate()) report << (decreases ? " (not guaranteed / violations found)" : " (not guaranteed)");
    report << '\n';
    violations += decreases;
  } else {
    report << "entropy decrease steps = n/a (no entropy output)\n";
  }
  report << "status = " << (violations ? "fail" : "pass") << '\n';

  {
    std::ofstream out(join_path(ctx.out_dir, "physics_report.txt"));
    if (!out) throw Error("cannot write physics report");
    out << report.str();
  }
  ctx.out << report.str();
  write_resolved_config(cfg, ctx, "check-physics");
  warn_unused(cfg, ctx);
  return violations ? kPhysics : kOk;
}

}  // namespace iphs::cli
