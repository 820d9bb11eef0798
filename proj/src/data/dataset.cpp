#include "iphs/data/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "iphs/error.hpp"

namespace iphs::data {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool has_unit_suffix(const std::string& h) {
  const auto open = h.find('[');
  return open != std::string::npos && open > 0 && h.size() > open + 2 && h.back() == ']';
}

double l2(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

void stats(const std::vector<std::vector<double>>& rows, std::size_t dim, std::vector<double>& mean,
           std::vector<double>& sd, std::vector<bool>& degenerate) {
  mean.assign(dim, 0.0);
  sd.assign(dim, 1.0);
  degenerate.assign(dim, false);
  if (rows.empty()) {
    std::fill(degenerate.begin(), degenerate.end(), true);
    return;
  }
  const double n = static_cast<double>(rows.size());
  for (const auto& r : rows)
    for (std::size_t d = 0; d < dim; ++d) mean[d] += r[d];
  for (auto& m : mean) m /= n;
  std::vector<double> var(dim, 0.0);
  for (const auto& r : rows)
    for (std::size_t d = 0; d < dim; ++d) var[d] += (r[d] - mean[d]) * (r[d] - mean[d]);
  for (std::size_t d = 0; d < dim; ++d) {
    sd[d] = std::sqrt(var[d] / n);
    if (!(sd[d] > 1e-12 * std::max(1.0, std::fabs(mean[d])))) {
      degenerate[d] = true;
      mean[d] = 0.0;
      sd[d] = 1.0;
    }
  }
}

std::vector<double> affine(std::span<const double> x, const std::vector<double>& mean,
                           const std::vector<double>& sd, bool forward, const char* what) {
  if (x.size() != mean.size()) throw DimensionError(what, mean.size(), x.size());
  std::vector<double> y(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    y[i] = forward ? (x[i] - mean[i]) / sd[i] : x[i] * sd[i] + mean[i];
  return y;
}

std::vector<std::string> headers(const std::vector<core::Label>& labels) {
  std::vector<std::string> out;
  for (const auto& l : labels) out.push_back(l.header());
  return out;
}

std::string join(const std::vector<std::string>& v, char sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += v[i];
  }
  return out;
}

}  // namespace

void Trajectory::validate() const {
  if (states.empty()) throw DimensionError("trajectory samples", 1, 0);
  if (inputs.size() + 1 != states.size())
    throw DimensionError("trajectory input rows", states.size() - 1, inputs.size());
  const std::size_t n = states.front().size();
  for (const auto& s : states)
    if (s.size() != n) throw DimensionError("trajectory state row", n, s.size());
  if (!inputs.empty()) {
    const std::size_t m = inputs.front().size();
    for (const auto& u : inputs)
      if (u.size() != m) throw DimensionError("trajectory input row", m, u.size());
  }
  if (!state_labels.empty() && state_labels.size() != n)
    throw DimensionError("trajectory state labels", n, state_labels.size());
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view text, std::size_t line) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto res = std::from_chars(first, last, v);
  if (t.empty() || res.ec != std::errc() || res.ptr != last)
    throw ParseError("non-numeric value '" + t + "'", line);
  return v;
}

std::vector<double> parse_double_list(std::string_view text, std::size_t line) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& cell : split(text, ',')) out.push_back(parse_double(cell, line));
  return out;
}

std::string format_double_list(std::span<const double> v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += format_double(v[i]);
  }
  return out;
}

Trajectory rk4_generate(const core::DynamicsModel& model, std::span<const double> x0,
                        const InputFunction& input, double h, std::size_t steps,
                        std::size_t substeps) {
  if (!(h > 0.0)) throw Error("rk4_generate: h must be positive");
  if (substeps == 0) throw Error("rk4_generate: substeps must be >= 1");
  if (x0.size() != model.state_dim()) throw DimensionError("initial state", model.state_dim(), x0.size());
  const std::size_t n = x0.size();
  const double dt = h / static_cast<double>(substeps);

  Trajectory traj;
  traj.h = h;
  traj.state_labels = model.state_labels();
  traj.input_labels = model.input_labels();
  traj.states.reserve(steps + 1);
  traj.inputs.reserve(steps);
  traj.states.emplace_back(x0.begin(), x0.end());

  std::vector<double> x(x0.begin(), x0.end()), tmp(n);
  auto stage = [&](const std::vector<double>& base, const std::vector<double>& k, double a,
                   std::vector<double>& out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = base[i] + a * k[i];
  };
  for (std::size_t step = 0; step < steps; ++step) {
    const double t_step = static_cast<double>(step) * h;
    try {
      for (std::size_t sub = 0; sub < substeps; ++sub) {
        const double t = t_step + static_cast<double>(sub) * dt;
        const auto u0 = input(t);
        const auto uh = input(t + 0.5 * dt);
        const auto u1 = input(t + dt);
        const auto k1 = model.rhs(x, u0);
        stage(x, k1, 0.5 * dt, tmp);
        const auto k2 = model.rhs(tmp, uh);
        stage(x, k2, 0.5 * dt, tmp);
        const auto k3 = model.rhs(tmp, uh);
        stage(x, k3, dt, tmp);
        const auto k4 = model.rhs(tmp, u1);
        for (std::size_t i = 0; i < n; ++i)
          x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
      }
    } catch (const NumericError& e) {
      throw NumericError("rk4_generate: step " + std::to_string(step) + ": " + e.what(), x);
    }
    const double norm = l2(x);
    if (!std::isfinite(norm) || norm > 1e12)
      throw NumericError("rk4_generate: state blow-up at step " + std::to_string(step), x);
    traj.inputs.push_back(input(t_step));
    traj.states.push_back(x);
  }
  traj.metadata["integrator"] = "rk4";
  traj.metadata["substeps"] = std::to_string(substeps);
  return traj;
}

Trajectory add_noise(const Trajectory& traj, double factor, std::uint64_t seed) {
  if (!(factor >= 0.0)) throw Error("add_noise: factor must be non-negative");
  Trajectory out = traj;
  if (factor == 0.0 || traj.states.empty()) return out;
  const std::size_t n = traj.state_dim();
  const double count = static_cast<double>(traj.samples());
  std::vector<double> mean(n, 0.0), sd(n, 0.0);
  for (const auto& x : traj.states)
    for (std::size_t d = 0; d < n; ++d) mean[d] += x[d];
  for (auto& m : mean) m /= count;
  for (const auto& x : traj.states)
    for (std::size_t d = 0; d < n; ++d) sd[d] += (x[d] - mean[d]) * (x[d] - mean[d]);
  for (auto& s : sd) s = count > 1 ? std::sqrt(s / (count - 1.0)) : 0.0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& x : out.states)
    for (std::size_t d = 0; d < n; ++d) x[d] += factor * sd[d] * normal(rng);
  out.metadata["noise_factor"] = format_double(factor);
  out.metadata["noise_seed"] = std::to_string(seed);
  return out;
}

std::vector<Trajectory> chunk(const Trajectory& traj, std::size_t len) {
  if (len < 2) throw Error("chunk: length must be at least 2 samples");
  std::vector<Trajectory> out;
  if (len > traj.samples()) return out;
  const std::size_t stride = len - 1;
  for (std::size_t start = 0; start + len <= traj.samples(); start += stride) {
    Trajectory c;
    c.h = traj.h;
    c.t0 = traj.time(start);
    c.state_labels = traj.state_labels;
    c.input_labels = traj.input_labels;
    c.metadata = traj.metadata;
    c.metadata["chunk_start"] = std::to_string(start);
    c.states.assign(traj.states.begin() + static_cast<std::ptrdiff_t>(start),
                    traj.states.begin() + static_cast<std::ptrdiff_t>(start + len));
    c.inputs.assign(traj.inputs.begin() + static_cast<std::ptrdiff_t>(start),
                    traj.inputs.begin() + static_cast<std::ptrdiff_t>(start + stride));
    out.push_back(std::move(c));
  }
  return out;
}

Split split_chunks(std::vector<Trajectory> chunks, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction >= 0.0 && train_fraction <= 1.0))
    throw Error("split_chunks: train fraction must lie in [0, 1]");
  std::vector<std::size_t> order(chunks.size());
  std::iota(order.begin(), order.end(), 0);
  // Fisher-Yates with an explicit engine so the permutation does not depend
  // on the standard library's shuffle implementation.
  std::mt19937_64 rng(seed);
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng() % i);
    std::swap(order[i - 1], order[j]);
  }
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(chunks.size())));
  Split s;
  for (std::size_t k = 0; k < order.size(); ++k)
    (k < n_train ? s.train : s.validation).push_back(std::move(chunks[order[k]]));
  return s;
}

Normalizer Normalizer::fit(std::span<const Trajectory> trajs) {
  if (trajs.empty()) throw Error("Normalizer::fit: no trajectories");
  std::vector<std::vector<double>> xs, us;
  for (const auto& t : trajs) {
    xs.insert(xs.end(), t.states.begin(), t.states.end());
    us.insert(us.end(), t.inputs.begin(), t.inputs.end());
  }
  Normalizer n;
  stats(xs, trajs.front().state_dim(), n.state_mean, n.state_std, n.state_degenerate);
  stats(us, trajs.front().input_dim(), n.input_mean, n.input_std, n.input_degenerate);
  return n;
}

Normalizer Normalizer::identity(std::size_t n, std::size_t m) {
  Normalizer z;
  z.state_mean.assign(n, 0.0);
  z.state_std.assign(n, 1.0);
  z.state_degenerate.assign(n, false);
  z.input_mean.assign(m, 0.0);
  z.input_std.assign(m, 1.0);
  z.input_degenerate.assign(m, false);
  return z;
}

std::vector<double> Normalizer::normalize_state(std::span<const double> x) const {
  return affine(x, state_mean, state_std, true, "normalizer state");
}
std::vector<double> Normalizer::denormalize_state(std::span<const double> x) const {
  return affine(x, state_mean, state_std, false, "normalizer state");
}
std::vector<double> Normalizer::normalize_input(std::span<const double> u) const {
  return affine(u, input_mean, input_std, true, "normalizer input");
}
std::vector<double> Normalizer::denormalize_input(std::span<const double> u) const {
  return affine(u, input_mean, input_std, false, "normalizer input");
}

Trajectory Normalizer::normalize(const Trajectory& traj) const {
  Trajectory out = traj;
  for (auto& x : out.states) x = normalize_state(x);
  for (auto& u : out.inputs) u = normalize_input(u);
  return out;
}

Trajectory Normalizer::denormalize(const Trajectory& traj) const {
  Trajectory out = traj;
  for (auto& x : out.states) x = denormalize_state(x);
  for (auto& u : out.inputs) u = denormalize_input(u);
  return out;
}

void Normalizer::to_metadata(std::map<std::string, std::string>& meta, const std::string& prefix) const {
  meta[prefix + "state_mean"] = format_double_list(state_mean);
  meta[prefix + "state_std"] = format_double_list(state_std);
  meta[prefix + "input_mean"] = format_double_list(input_mean);
  meta[prefix + "input_std"] = format_double_list(input_std);
  auto flags = [](const std::vector<bool>& v) {
    std::vector<double> out(v.begin(), v.end());
    return format_double_list(out);
  };
  meta[prefix + "state_degenerate"] = flags(state_degenerate);
  meta[prefix + "input_degenerate"] = flags(input_degenerate);
}

Normalizer Normalizer::from_metadata(const std::map<std::string, std::string>& meta,
                                     const std::string& prefix) {
  auto get = [&](const std::string& key) {
    const auto it = meta.find(prefix + key);
    if (it == meta.end()) throw ParseError("missing key '" + prefix + key + "'");
    return parse_double_list(it->second);
  };
  Normalizer n;
  n.state_mean = get("state_mean");
  n.state_std = get("state_std");
  n.input_mean = get("input_mean");
  n.input_std = get("input_std");
  if (n.state_std.size() != n.state_mean.size())
    throw DimensionError("normalizer state_std", n.state_mean.size(), n.state_std.size());
  if (n.input_std.size() != n.input_mean.size())
    throw DimensionError("normalizer input_std", n.input_mean.size(), n.input_std.size());
  auto flags = [&](const std::string& key, std::size_t len) {
    std::vector<bool> out(len, false);
    if (!meta.contains(prefix + key)) return out;
    const auto v = get(key);
    if (v.size() != len) throw DimensionError("normalizer " + key, len, v.size());
    for (std::size_t i = 0; i < len; ++i) out[i] = v[i] != 0.0;
    return out;
  };
  n.state_degenerate = flags("state_degenerate", n.state_mean.size());
  n.input_degenerate = flags("input_degenerate", n.input_mean.size());
  return n;
}

void write_csv(const std::string& path, const Trajectory& traj) {
  traj.validate();
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  std::vector<std::string> cols{"t[s]"};
  for (const auto& h : headers(traj.state_labels)) cols.push_back(h);
  for (const auto& h : headers(traj.input_labels)) cols.push_back(h);
  out << join(cols, ',') << '\n';
  const std::size_t m = traj.input_labels.size();
  for (std::size_t k = 0; k < traj.samples(); ++k) {
    out << format_double(traj.time(k));
    for (double v : traj.states[k]) out << ',' << format_double(v);
    if (k < traj.steps())
      for (double v : traj.inputs[k]) out << ',' << format_double(v);
    else
      for (std::size_t i = 0; i < m; ++i) out << ',';
    out << '\n';
  }
  if (!out) throw Error("failed writing '" + path + "'");
}

Trajectory read_csv(const std::string& path, const CsvSchema& schema) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty file", 1);
  const auto header = split(line, ',');
  for (const auto& h : header)
    if (!has_unit_suffix(h)) throw ParseError("column '" + h + "' lacks a [unit] suffix", 1);

  auto locate = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ParseError("missing column '" + name + "'", 1);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t t_col = locate("t[s]");
  std::vector<std::size_t> s_cols, u_cols;
  for (const auto& s : schema.states) s_cols.push_back(locate(s));
  for (const auto& u : schema.inputs) u_cols.push_back(locate(u));

  Trajectory traj;
  for (const auto& s : schema.states) traj.state_labels.push_back(parse_label(s));
  for (const auto& u : schema.inputs) traj.input_labels.push_back(parse_label(u));

  std::vector<double> times;
  std::vector<std::vector<double>> inputs;
  std::size_t line_no = 1;
  std::size_t empty_input_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (empty_input_line != 0)
      throw ParseError("row without inputs is only allowed as the last row", empty_input_line);
    const auto cells = split(line, ',');
    if (cells.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " cells, found " +
                       std::to_string(cells.size()), line_no);
    times.push_back(parse_double(cells[t_col], line_no));
    std::vector<double> x;
    for (auto c : s_cols) x.push_back(parse_double(cells[c], line_no));
    traj.states.push_back(std::move(x));
    const bool no_inputs = !u_cols.empty() && std::all_of(u_cols.begin(), u_cols.end(),
                                                          [&](std::size_t c) { return cells[c].empty(); });
    if (no_inputs) {
      empty_input_line = line_no;
      continue;
    }
    std::vector<double> u;
    for (auto c : u_cols) u.push_back(parse_double(cells[c], line_no));
    inputs.push_back(std::move(u));

    const std::size_t k = times.size() - 1;
    if (k >= 2) {
      const double h = times[1] - times[0];
      const double dt = times[k] - times[k - 1];
      if (!(std::fabs(dt - h) <= 1e-6 * std::fabs(h)))
        throw ParseError("inconsistent time step", line_no);
    }
  }
  if (traj.states.empty()) throw ParseError("no data rows", line_no);
  if (times.size() >= 2) {
    const double h = times[1] - times[0];
    if (!(h > 0.0)) throw ParseError("time must increase", 3);
    const double dt = times.back() - times[times.size() - 2];
    if (!(std::fabs(dt - h) <= 1e-6 * std::fabs(h)))
      throw ParseError("inconsistent time step", line_no);
    traj.h = h;
  }
  traj.t0 = times.front();
  // A final row with inputs is accepted; its inputs are not part of the L steps.
  inputs.resize(traj.states.size() - 1);
  traj.inputs = std::move(inputs);
  return traj;
}

std::string metadata_path(const std::string& csv_path) {
  const auto dot = csv_path.find_last_of('.');
  const auto slash = csv_path.find_last_of('/');
  if (dot == std::string::npos || (slash != std::string::npos && dot < slash)) return csv_path + ".meta";
  return csv_path.substr(0, dot) + ".meta";
}

Trajectory read_csv(const std::string& path) {
  const auto meta = read_metadata(metadata_path(path));
  auto get = [&](const char* key) {
    const auto it = meta.find(key);
    if (it == meta.end()) throw ParseError(std::string("metadata lacks '") + key + "'");
    return it->second;
  };
  CsvSchema schema;
  schema.states = split(get("state_columns"), ',');
  const auto inputs = get("input_columns");
  if (!trim(inputs).empty()) schema.inputs = split(inputs, ',');
  auto traj = read_csv(path, schema);
  traj.metadata = meta;
  return traj;
}

void write_dataset(const std::string& csv_path, const Trajectory& traj) {
  write_csv(csv_path, traj);
  auto meta = traj.metadata;
  meta["state_columns"] = join(headers(traj.state_labels), ',');
  meta["input_columns"] = join(headers(traj.input_labels), ',');
  meta["h"] = format_double(traj.h);
  meta["samples"] = std::to_string(traj.samples());
  write_metadata(metadata_path(csv_path), meta);
}

core::Label parse_label(std::string_view header) {
  const std::string h = trim(std::string(header));
  const auto open = h.find('[');
  if (open == std::string::npos || open == 0 || h.back() != ']')
    throw ParseError("column '" + h + "' lacks a name[unit] form");
  return {h.substr(0, open), h.substr(open + 1, h.size() - open - 2)};
}

std::map<std::string, std::string> read_metadata(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::map<std::string, std::string> meta;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
    const std::string key = trim(t.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", line_no);
    meta[key] = trim(t.substr(eq + 1));
  }
  return meta;
}

void write_metadata(const std::string& path, const std::map<std::string, std::string>& meta) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  for (const auto& [k, v] : meta) out << k << " = " << v << '\n';
  if (!out) throw Error("failed writing '" + path + "'");
}

}  // namespace iphs::data
