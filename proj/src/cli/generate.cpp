#include <cmath>
#include <numbers>
#include <ostream>

#include "common.hpp"
#include "iphs/building/building_model.hpp"
#include "iphs/error.hpp"
#include "iphs/gas/gas_piston.hpp"

namespace iphs::cli {

namespace {

void put_list(std::map<std::string, std::string>& meta, const std::string& key, const std::vector<double>& v) {
  meta[key] = data::format_double_list(v);
}

std::vector<std::pair<std::size_t, std::size_t>> parse_edges(const std::string& text) {
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::size_t start = 0;
  while (start < text.size()) {
    auto pos = text.find(',', start);
    if (pos == std::string::npos) pos = text.size();
    const std::string cell = text.substr(start, pos - start);
    start = pos + 1;
    if (cell.find_first_not_of(" \t") == std::string::npos) continue;
    const auto dash = cell.find('-');
    if (dash == std::string::npos) throw ParseError("config key 'edges': '" + cell + "' is not of the form i-j");
    const double i = data::parse_double(cell.substr(0, dash));
    const double j = data::parse_double(cell.substr(dash + 1));
    if (i < 0 || j < 0 || i != std::floor(i) || j != std::floor(j))
      throw ParseError("config key 'edges': '" + cell + "' needs non-negative zone indices");
    edges.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(j));
  }
  return edges;
}

std::string chain_edges(std::size_t n) {
  std::string out;
  for (std::size_t i = 0; i + 1 < n; ++i) out += (i ? ", " : "") + std::to_string(i) + "-" + std::to_string(i + 1);
  return out;
}

}  // namespace

int cmd_generate_gas(const Config& cfg, const RunContext& ctx) {
  gas::GasPistonTruth truth;
  truth.mass = cfg.get_double("mass", truth.mass);
  truth.alpha = cfg.get_double("alpha", truth.alpha);
  truth.beta = cfg.get_double("beta", truth.beta);
  truth.mu = cfg.get_double("mu", truth.mu);
  truth.k_spring = cfg.get_double("k_spring", truth.k_spring);
  truth.r_gas = cfg.get_double("r_gas", truth.r_gas);
  truth.c_v = cfg.get_double("c_v", truth.c_v);
  truth.molar_mass = cfg.get_double("molar_mass", truth.molar_mass);
  truth.p0 = cfg.get_double("p0", truth.p0);
  truth.t0 = cfg.get_double("t0", truth.t0);
  truth.s0 = cfg.get_double("s0", truth.s0);
  truth.v0 = cfg.get_double("v0", truth.v0);
  const auto x0 = cfg.get_doubles("x0", {0.0, 0.001, 0.3, 0.0});
  const std::size_t samples = cfg.get_count("samples", 10000);
  const double h = cfg.get_double("h", 0.01);
  const std::size_t substeps = cfg.get_count("substeps", 10);
  const double amplitude = cfg.get_double("forcing_amplitude", 2.0);
  const double frequency = cfg.get_double("forcing_frequency", 0.2);
  const double noise = cfg.get_double("noise_factor", 0.2);
  const std::size_t chunk_len = cfg.get_count("chunk_len", 250);
  const std::uint64_t seed = cfg.get_seed();
  if (samples < 2) throw ParseError("config key 'samples' must be at least 2");
  if (!(h > 0.0)) throw ParseError("config key 'h' must be positive");
  if (substeps == 0) throw ParseError("config key 'substeps' must be positive");
  if (x0.size() != 4) throw DimensionError("config key 'x0'", 4, x0.size());

  const gas::GasPistonModel model(truth);
  std::map<std::string, std::string> meta{
      {"source", "gas-piston truth model, RK4"},
      {"seed", std::to_string(seed)},
      {"noise_factor", data::format_double(noise)},
      {"substeps", std::to_string(substeps)},
      {"chunk_len", std::to_string(chunk_len)},
      {"truth.mass", data::format_double(truth.mass)},
      {"truth.alpha", data::format_double(truth.alpha)},
      {"truth.beta", data::format_double(truth.beta)},
      {"truth.mu", data::format_double(truth.mu)},
      {"truth.k_spring", data::format_double(truth.k_spring)},
      {"truth.r_gas", data::format_double(truth.r_gas)},
      {"truth.c_v", data::format_double(truth.c_v)},
      {"truth.molar_mass", data::format_double(truth.molar_mass)},
      {"truth.p0", data::format_double(truth.p0)},
      {"truth.t0", data::format_double(truth.t0)},
      {"truth.s0", data::format_double(truth.s0)},
      {"truth.v0", data::format_double(truth.v0)},
      {"truth.n_mol", data::format_double(truth.n_mol())},
      {"truth.m_gas", data::format_double(truth.m_gas())},
  };
  put_list(meta, "x0", x0);

  struct Variant {
    std::string name;
    data::InputFunction input;
    std::string forcing;
    std::uint64_t noise_seed;
  };
  const std::vector<Variant> variants{
      {"gas", [=](double t) { return core::InputVector{amplitude * std::sin(2.0 * std::numbers::pi * frequency * t)}; },
       "A*sin(2*pi*f*t), A = " + data::format_double(amplitude) + " N, f = " + data::format_double(frequency) + " Hz",
       seed + 1},
      {"gas_free", [](double) { return core::InputVector{0.0}; }, "none", seed + 2},
  };
  ensure_dir(ctx.out_dir);
  for (const auto& v : variants) {
    auto clean = data::rk4_generate(model, x0, v.input, h, samples - 1, substeps);
    clean.metadata = meta;
    clean.metadata["forcing"] = v.forcing;
    clean.metadata["noise_factor"] = "0";
    auto noisy = data::add_noise(clean, noise, v.noise_seed);
    noisy.metadata = clean.metadata;
    noisy.metadata["noise_factor"] = data::format_double(noise);
    noisy.metadata["noise_seed"] = std::to_string(v.noise_seed);
    data::write_dataset(join_path(ctx.out_dir, v.name + "_clean.csv"), clean);
    data::write_dataset(join_path(ctx.out_dir, v.name + "_noisy.csv"), noisy);
    const double e0 = truth.total_energy(clean.states.front());
    const double e1 = truth.total_energy(clean.states.back());
    ctx.out << v.name << ": " << clean.samples() << " samples, H_total " << data::format_double(e0)
            << " -> " << data::format_double(e1) << " J\n";
  }
  write_resolved_config(cfg, ctx, "generate-gas");
  warn_unused(cfg, ctx);
  return kOk;
}

int cmd_generate_building(const Config& cfg, const RunContext& ctx) {
  const std::size_t n = cfg.get_count("zones", 3);
  if (n == 0) throw ParseError("config key 'zones' must be positive");
  const auto ref = building::reference_building(n);
  building::Adjacency adj(n, parse_edges(cfg.get("edges", chain_edges(n))));
  const auto lambda_edge_default =
      adj.edges().size() == ref.adjacency.edges().size() ? ref.lambda_edge() : std::vector<double>(adj.edges().size(), 35.0);
  const auto lambda_edge = cfg.get_doubles("lambda_edge", lambda_edge_default);
  const auto lambda_ext = cfg.get_doubles("lambda_ext", ref.lambda_ext());
  const auto b_s = cfg.get_doubles("b_s", ref.b_s());
  const auto b_h = cfg.get_doubles("b_h", ref.b_h());
  const auto b_c = cfg.get_doubles("b_c", ref.b_c());
  const auto heat_capacity = cfg.get_doubles("heat_capacity", ref.heat_capacity);
  const auto t_ref = cfg.get_doubles("t_ref", ref.t_ref);
  const auto t_init = cfg.get_doubles("t_init", std::vector<double>(n, 293.15));
  const std::size_t steps = cfg.get_count("steps", 28800);
  const double h = cfg.get_double("h", 900.0);
  const std::size_t substeps = cfg.get_count("substeps", 10);
  const double noise = cfg.get_double("noise_factor", 0.2);
  const std::size_t chunk_len = cfg.get_count("chunk_len", 289);
  const std::uint64_t seed = cfg.get_seed();
  if (steps == 0) throw ParseError("config key 'steps' must be positive");
  if (!(h > 0.0)) throw ParseError("config key 'h' must be positive");
  if (substeps == 0) throw ParseError("config key 'substeps' must be positive");

  const auto truth = building::BuildingParams::from_effective(
      adj, lambda_edge, lambda_ext, b_s, b_h, b_c, heat_capacity, t_ref, std::vector<double>(n, 0.0));
  const auto inputs = building::synth_building_inputs(n, steps, h, seed);
  auto clean = building::synth_building_generate(truth, inputs, t_init, h, substeps);

  std::map<std::string, std::string> meta{
      {"source", "synthetic building entropy model, explicit Euler"},
      {"seed", std::to_string(seed)},
      {"substeps", std::to_string(substeps)},
      {"chunk_len", std::to_string(chunk_len)},
      {"truth.edges", cfg.get("edges", chain_edges(n))},
  };
  put_list(meta, "truth.lambda_edge", lambda_edge);
  put_list(meta, "truth.lambda_ext", lambda_ext);
  put_list(meta, "truth.b_s", b_s);
  put_list(meta, "truth.b_h", b_h);
  put_list(meta, "truth.b_c", b_c);
  put_list(meta, "truth.heat_capacity", heat_capacity);
  put_list(meta, "truth.t_ref", t_ref);
  put_list(meta, "t_init", t_init);
  clean.metadata = meta;
  clean.metadata["noise_factor"] = "0";
  auto noisy = data::add_noise(clean, noise, seed + 1);
  noisy.metadata = meta;
  noisy.metadata["noise_factor"] = data::format_double(noise);
  noisy.metadata["noise_seed"] = std::to_string(seed + 1);

  ensure_dir(ctx.out_dir);
  data::write_dataset(join_path(ctx.out_dir, "building_clean.csv"), clean);
  data::write_dataset(join_path(ctx.out_dir, "building_noisy.csv"), noisy);
  ctx.out << "building: " << n << " zones, " << clean.samples() << " samples at h = "
          << data::format_double(h) << " s\n";
  write_resolved_config(cfg, ctx, "generate-building");
  warn_unused(cfg, ctx);
  return kOk;
}

}  // namespace iphs::cli
