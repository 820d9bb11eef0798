#include <CLI11.hpp>
#include <ostream>

#include "common.hpp"
#include "iphs/error.hpp"

namespace iphs::cli {

namespace {

// Malformed command line; maps to the usage exit code.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::vector<std::string> overrides;
};

void add_common(CLI::App* sub, Options& o) {
  sub->add_option("--config", o.config_path, "flat 'key = value' config file");
  sub->add_option("--seed", o.seed, "seed (overrides the config)");
  sub->add_option("--out", o.out_dir, "run directory")->capture_default_str();
  sub->add_option("--set", o.overrides, "override a config key: key=value (repeatable)");
}

Config resolve(const Options& o) {
  Config cfg = o.config_path.empty() ? Config() : Config::load(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError("--set expects key=value, got '" + kv + "'");
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t");
      return b == std::string::npos ? std::string() : s.substr(b, s.find_last_not_of(" \t") - b + 1);
    };
    cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  if (o.seed) cfg.set("seed", std::to_string(*o.seed));
  return cfg;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structure-preserving neural ODE identification of irreversible port-Hamiltonian models",
               "iphs"};
  app.require_subcommand(1);
  Options o;
  const std::vector<std::pair<std::string, std::string>> commands{
      {"generate-gas", "simulate the gas-piston system and write clean and noisy datasets"},
      {"generate-building", "simulate the synthetic multi-zone building and write datasets"},
      {"train", "train a model (config key 'model') on a dataset"},
      {"evaluate", "multistep MAE of a checkpoint on the validation chunks"},
      {"check-physics", "verify the physics invariants of a checkpoint"},
      {"baseline-arx", "fit the ARX baseline"},
      {"baseline-node", "train the unconstrained neural ODE baseline"},
  };
  for (const auto& [name, help] : commands) add_common(app.add_subcommand(name, help), o);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    const Config cfg = resolve(o);
    const RunContext ctx{o.out_dir, out, err};
    if (name == "generate-gas") return cmd_generate_gas(cfg, ctx);
    if (name == "generate-building") return cmd_generate_building(cfg, ctx);
    if (name == "train") return cmd_train(cfg, ctx);
    if (name == "evaluate") return cmd_evaluate(cfg, ctx);
    if (name == "check-physics") return cmd_check_physics(cfg, ctx);
    if (name == "baseline-arx") return cmd_baseline_arx(cfg, ctx);
    if (name == "baseline-node") return cmd_train(cfg, ctx, "vanilla-node");
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << '\n';
    return kParse;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << '\n';
    return kNumeric;
  } catch (const PhysicsViolation& e) {
    err << "physics violation: " << e.what() << '\n';
    return kPhysics;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace iphs::cli
