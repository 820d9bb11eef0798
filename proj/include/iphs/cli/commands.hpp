#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "iphs/cli/config.hpp"

namespace iphs::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,    // bad command line, missing files, unsupported requests
  kParse = 2,    // malformed config, CSV or checkpoint
  kNumeric = 3,  // non-finite values, divergence
  kPhysics = 4,  // a physics check failed
};

/// Output channels and run directory shared by every subcommand.
struct RunContext {
  std::string out_dir;
  std::ostream& out;
  std::ostream& err;
};

int cmd_generate_gas(const Config& cfg, const RunContext& ctx);
int cmd_generate_building(const Config& cfg, const RunContext& ctx);
/// `forced_model` overrides the config's model key (used by baseline-node).
int cmd_train(const Config& cfg, const RunContext& ctx, const std::string& forced_model = "");
int cmd_baseline_arx(const Config& cfg, const RunContext& ctx);
int cmd_evaluate(const Config& cfg, const RunContext& ctx);
int cmd_check_physics(const Config& cfg, const RunContext& ctx);

/// Parses a full command line (program name excluded), runs the subcommand
/// and maps library errors to exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace iphs::cli
