#include "iphs/building/building_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "iphs/ad/var.hpp"
#include "iphs/error.hpp"

namespace iphs::building {

namespace {

constexpr double kMaxExponent = 700.0;

const char* const kGroups[] = {"lambda_edge", "lambda_ext", "b_s", "b_h", "b_c"};

template <class S>
struct Effective {
  std::vector<S> lambda_edge, lambda_ext, b_s, b_h, b_c;
};

template <class S>
std::vector<S> positive(std::span<const S> raw, Positivity mode) {
  std::vector<S> out;
  out.reserve(raw.size());
  for (const auto& r : raw) {
    if (mode == Positivity::Softplus)
      out.push_back(ad::softplus(r));
    else
      out.push_back(r);
  }
  return out;
}

template <class S>
std::span<const S> slice(std::span<const S> theta, std::size_t& offset, std::size_t len) {
  auto s = theta.subspan(offset, len);
  offset += len;
  return s;
}

template <class S>
Effective<S> effective_from_theta(std::span<const S> theta, std::size_t n_edges, std::size_t n,
                                  Positivity mode) {
  std::size_t off = 0;
  Effective<S> e;
  e.lambda_edge = positive(slice(theta, off, n_edges), mode);
  e.lambda_ext = positive(slice(theta, off, n), mode);
  e.b_s = positive(slice(theta, off, n), mode);
  e.b_h = positive(slice(theta, off, n), mode);
  e.b_c = positive(slice(theta, off, n), mode);
  return e;
}

std::vector<double> flat_raw(const BuildingParams& p) {
  std::vector<double> theta;
  for (const auto* v : {&p.raw_lambda_edge, &p.raw_lambda_ext, &p.raw_b_s, &p.raw_b_h, &p.raw_b_c})
    theta.insert(theta.end(), v->begin(), v->end());
  return theta;
}

template <class S>
std::vector<S> temperatures(const BuildingParams& p, std::span<const S> s) {
  const std::size_t n = p.n_zones();
  if (s.size() != n) throw DimensionError("zone entropy", n, s.size());
  std::vector<S> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const S z = (s[i] - p.s_ref[i]) / p.heat_capacity[i];
    const double zv = ad::value_of(z);
    if (!(std::fabs(zv) <= kMaxExponent))
      throw NumericError("temperature_from_entropy: exponent overflow in zone " + std::to_string(i));
    t.push_back(p.t_ref[i] * ad::exp(z));
  }
  return t;
}

// J̃(T)·T, accumulated edge by edge.
template <class S>
std::vector<S> jtilde_times(const Adjacency& adj, std::span<const S> lambda_edge,
                            std::span<const S> t) {
  std::vector<S> out(adj.n_zones(), S(0.0));
  const auto& edges = adj.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [i, j] = edges[k];
    const S r = lambda_edge[k] * (t[j] - t[i]) / (t[i] * t[j]);
    out[i] += r * t[j];
    out[j] -= r * t[i];
  }
  return out;
}

template <class S>
std::vector<S> rhs_impl(const BuildingParams& p, const Effective<S>& e, std::span<const S> s,
                        std::span<const double> u) {
  const std::size_t n = p.n_zones();
  if (u.size() != 1 + 3 * n) throw DimensionError("building input", 1 + 3 * n, u.size());
  const double te = u[0];
  if (!(te > 0.0)) throw NumericError("ambient temperature must be positive", {u.begin(), u.end()});
  const auto t = temperatures<S>(p, s);
  auto ds = jtilde_times<S>(p.adjacency, e.lambda_edge, t);
  for (std::size_t i = 0; i < n; ++i) {
    const S be = e.lambda_ext[i] * (te - t[i]) / (t[i] * te);
    ds[i] += be * te + e.b_s[i] * u[1 + i] + e.b_h[i] * u[1 + n + i] + e.b_c[i] * u[1 + 2 * n + i];
  }
  return ds;
}

void check_length(const std::vector<double>& v, std::size_t n, const char* name) {
  if (v.size() != n) throw DimensionError(name, n, v.size());
}

}  // namespace

Adjacency::Adjacency(std::size_t n_zones, std::vector<std::pair<std::size_t, std::size_t>> edges)
    : n_zones_(n_zones) {
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (auto [i, j] : edges) {
    if (i == j) throw Error("adjacency: self-loop on zone " + std::to_string(i));
    if (i >= n_zones || j >= n_zones)
      throw Error("adjacency: edge (" + std::to_string(i) + "," + std::to_string(j) +
                  ") out of range for " + std::to_string(n_zones) + " zones");
    if (i > j) std::swap(i, j);
    if (!seen.insert({i, j}).second)
      throw Error("adjacency: duplicate edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
    edges_.emplace_back(i, j);
  }
}

Adjacency Adjacency::chain(std::size_t n_zones) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i + 1 < n_zones; ++i) e.emplace_back(i, i + 1);
  return Adjacency(n_zones, std::move(e));
}

double inverse_softplus(double v) {
  if (!(v > 0.0)) throw Error("inverse_softplus: value must be positive");
  // log(expm1(v)) loses nothing for small v and equals v + log1p(-exp(-v)) for large v.
  return v > 30.0 ? v + std::log1p(-std::exp(-v)) : std::log(std::expm1(v));
}

BuildingParams BuildingParams::from_effective(Adjacency adjacency, std::span<const double> lambda_edge,
                                              std::span<const double> lambda_ext,
                                              std::span<const double> b_s, std::span<const double> b_h,
                                              std::span<const double> b_c,
                                              std::vector<double> heat_capacity,
                                              std::vector<double> t_ref, std::vector<double> s_ref,
                                              Positivity positivity) {
  auto raw = [positivity](std::span<const double> v) {
    std::vector<double> out;
    for (double x : v) out.push_back(positivity == Positivity::Softplus ? inverse_softplus(x) : x);
    return out;
  };
  BuildingParams p{std::move(adjacency), raw(lambda_edge), raw(lambda_ext), raw(b_s), raw(b_h),
                   raw(b_c), std::move(heat_capacity), std::move(t_ref), std::move(s_ref),
                   positivity};
  p.validate();
  return p;
}

BuildingParams BuildingParams::initial_guess(Adjacency adjacency, std::vector<double> t_ref,
                                             double heat_capacity) {
  const std::size_t n = adjacency.n_zones();
  const std::size_t m = adjacency.edges().size();
  const std::vector<double> edge(m, 1.0), ext(n, 0.5), gain(n, 1e-3);
  return from_effective(std::move(adjacency), edge, ext, gain, gain, gain,
                        std::vector<double>(n, heat_capacity), std::move(t_ref),
                        std::vector<double>(n, 0.0));
}

std::vector<double> BuildingParams::lambda_edge() const {
  return positive<double>(raw_lambda_edge, positivity);
}
std::vector<double> BuildingParams::lambda_ext() const {
  return positive<double>(raw_lambda_ext, positivity);
}
std::vector<double> BuildingParams::b_s() const { return positive<double>(raw_b_s, positivity); }
std::vector<double> BuildingParams::b_h() const { return positive<double>(raw_b_h, positivity); }
std::vector<double> BuildingParams::b_c() const { return positive<double>(raw_b_c, positivity); }

void BuildingParams::validate() const {
  const std::size_t n = n_zones();
  check_length(raw_lambda_edge, adjacency.edges().size(), "raw_lambda_edge");
  check_length(raw_lambda_ext, n, "raw_lambda_ext");
  check_length(raw_b_s, n, "raw_b_s");
  check_length(raw_b_h, n, "raw_b_h");
  check_length(raw_b_c, n, "raw_b_c");
  check_length(heat_capacity, n, "heat_capacity");
  check_length(t_ref, n, "t_ref");
  check_length(s_ref, n, "s_ref");
  for (std::size_t i = 0; i < n; ++i) {
    if (!(heat_capacity[i] > 0.0))
      throw Error("heat_capacity of zone " + std::to_string(i) + " must be positive");
    if (!(t_ref[i] > 0.0)) throw Error("t_ref of zone " + std::to_string(i) + " must be positive");
  }
}

std::vector<double> BuildingInputs::flatten() const {
  std::vector<double> u{t_ext};
  u.insert(u.end(), q_solar.begin(), q_solar.end());
  u.insert(u.end(), q_heat.begin(), q_heat.end());
  u.insert(u.end(), q_cool.begin(), q_cool.end());
  return u;
}

BuildingInputs BuildingInputs::unflatten(std::span<const double> u, std::size_t n) {
  if (u.size() != 1 + 3 * n) throw DimensionError("building input", 1 + 3 * n, u.size());
  BuildingInputs in;
  in.t_ext = u[0];
  in.q_solar.assign(u.begin() + 1, u.begin() + 1 + n);
  in.q_heat.assign(u.begin() + 1 + n, u.begin() + 1 + 2 * n);
  in.q_cool.assign(u.begin() + 1 + 2 * n, u.end());
  return in;
}

std::vector<double> temperature_from_entropy(const BuildingParams& p, std::span<const double> s) {
  return temperatures<double>(p, s);
}

std::vector<double> entropy_from_temperature(const BuildingParams& p, std::span<const double> t) {
  const std::size_t n = p.n_zones();
  if (t.size() != n) throw DimensionError("zone temperature", n, t.size());
  std::vector<double> s(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(t[i] > 0.0))
      throw NumericError("entropy_from_temperature: non-positive temperature in zone " +
                         std::to_string(i), {t.begin(), t.end()});
    s[i] = p.s_ref[i] + p.heat_capacity[i] * std::log(t[i] / p.t_ref[i]);
  }
  return s;
}

core::SkewSymmetricMatrix build_jtilde(const BuildingParams& p, std::span<const double> t) {
  const std::size_t n = p.n_zones();
  if (t.size() != n) throw DimensionError("zone temperature", n, t.size());
  const auto lambda = p.lambda_edge();
  core::SkewSymmetricMatrix j(n);
  const auto& edges = p.adjacency.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [a, b] = edges[k];
    j.set(a, b, lambda[k] * (t[b] - t[a]) / (t[a] * t[b]));
  }
  return j;
}

std::vector<EdgeTerm> decompose_jtilde(const BuildingParams& p, std::span<const double> t) {
  const std::size_t n = p.n_zones();
  if (t.size() != n) throw DimensionError("zone temperature", n, t.size());
  const auto lambda = p.lambda_edge();
  std::vector<EdgeTerm> terms;
  const auto& edges = p.adjacency.edges();
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [a, b] = edges[k];
    core::SkewSymmetricMatrix jk(n);
    jk.set(a, b, 1.0);
    terms.push_back({edges[k], lambda[k] * (t[b] - t[a]) / (t[a] * t[b]), std::move(jk)});
  }
  return terms;
}

std::vector<double> building_rhs(const BuildingParams& p, std::span<const double> s,
                                 const BuildingInputs& inputs) {
  const auto theta = flat_raw(p);
  const auto e = effective_from_theta<double>(theta, p.adjacency.edges().size(), p.n_zones(),
                                              p.positivity);
  const auto u = inputs.flatten();
  return rhs_impl<double>(p, e, s, u);
}

BuildingModel::BuildingModel(const BuildingParams& params) : fixed_(params), n_(params.n_zones()) {
  fixed_.validate();
  params_.add_segment(kGroups[0], params.raw_lambda_edge);
  params_.add_segment(kGroups[1], params.raw_lambda_ext);
  params_.add_segment(kGroups[2], params.raw_b_s);
  params_.add_segment(kGroups[3], params.raw_b_h);
  params_.add_segment(kGroups[4], params.raw_b_c);
}

std::unique_ptr<core::TrainableModel> BuildingModel::clone() const {
  return std::make_unique<BuildingModel>(*this);
}

BuildingParams BuildingModel::building_params() const {
  BuildingParams p = fixed_;
  auto copy = [this](const char* name) {
    const auto s = params_.segment(name);
    return std::vector<double>(s.begin(), s.end());
  };
  p.raw_lambda_edge = copy(kGroups[0]);
  p.raw_lambda_ext = copy(kGroups[1]);
  p.raw_b_s = copy(kGroups[2]);
  p.raw_b_h = copy(kGroups[3]);
  p.raw_b_c = copy(kGroups[4]);
  return p;
}

core::StateVector BuildingModel::rhs(std::span<const double> s, std::span<const double> u) const {
  const auto e = effective_from_theta<double>(params_.values(), fixed_.adjacency.edges().size(), n_,
                                              fixed_.positivity);
  return rhs_impl<double>(fixed_, e, s, u);
}

core::StateVector BuildingModel::internal_rhs(std::span<const double> s) const {
  const auto e = effective_from_theta<double>(params_.values(), fixed_.adjacency.edges().size(), n_,
                                              fixed_.positivity);
  const auto t = temperatures<double>(fixed_, s);
  return jtilde_times<double>(fixed_.adjacency, e.lambda_edge, t);
}

std::vector<ad::Var> BuildingModel::rhs_tape(std::span<const ad::Var> theta,
                                             std::span<const ad::Var> s,
                                             std::span<const double> u) const {
  const auto e = effective_from_theta<ad::Var>(theta, fixed_.adjacency.edges().size(), n_,
                                               fixed_.positivity);
  return rhs_impl<ad::Var>(fixed_, e, s, u);
}

double BuildingModel::hamiltonian(std::span<const double> s) const {
  const auto t = temperatures<double>(fixed_, s);
  double h = 0.0;
  for (std::size_t i = 0; i < n_; ++i) h += fixed_.heat_capacity[i] * t[i];
  return h;
}

std::vector<double> BuildingModel::hamiltonian_grad(std::span<const double> s) const {
  return temperatures<double>(fixed_, s);
}

double BuildingModel::entropy_rate(std::span<const double> s) const {
  const auto flow = internal_rhs(s);
  double total = 0.0;
  for (double f : flow) total += f;
  return total;
}

std::vector<core::Label> BuildingModel::state_labels() const {
  std::vector<core::Label> out;
  for (std::size_t i = 0; i < n_; ++i) out.push_back({"S_zone" + std::to_string(i + 1), "J/K"});
  return out;
}

std::vector<core::Label> BuildingModel::input_labels() const {
  std::vector<core::Label> out{{"T_e", "K"}};
  for (const char* g : {"Q_s", "Q_h", "Q_c"})
    for (std::size_t i = 0; i < n_; ++i) out.push_back({g + std::to_string(i + 1), "W"});
  return out;
}

std::vector<core::Label> BuildingModel::output_labels() const {
  std::vector<core::Label> out;
  for (std::size_t i = 0; i < n_; ++i) out.push_back({"T_zone" + std::to_string(i + 1), "K"});
  return out;
}

core::StateVector BuildingModel::encode(std::span<const double> temperatures) const {
  return entropy_from_temperature(fixed_, temperatures);
}

std::vector<double> BuildingModel::observe(std::span<const double> s) const {
  return temperatures<double>(fixed_, s);
}

std::vector<ad::Var> BuildingModel::observe_tape(std::span<const ad::Var>,
                                                 std::span<const ad::Var> s) const {
  return temperatures<ad::Var>(fixed_, s);
}

std::vector<ad::Var> BuildingModel::effective_tape(std::span<const ad::Var> theta,
                                                   std::string_view group) const {
  const auto raw = core::TrainableModel::effective_tape(theta, group);
  return positive<ad::Var>(raw, fixed_.positivity);
}

std::vector<std::string> BuildingModel::parameter_violations() const {
  std::vector<std::string> out;
  for (const char* g : kGroups) {
    const auto v = effective(g);
    for (std::size_t i = 0; i < v.size(); ++i) {
      // Conductances must be strictly positive, gains only nonnegative.
      const bool lambda = std::string_view(g).starts_with("lambda");
      if (!std::isfinite(v[i]) || (lambda ? !(v[i] > 0.0) : !(v[i] >= 0.0)))
        out.push_back(std::string(g) + "[" + std::to_string(i) + "] = " + std::to_string(v[i]) +
                      (lambda ? " is not strictly positive" : " is negative"));
    }
  }
  return out;
}

std::vector<core::InputVector> synth_building_inputs(std::size_t n, std::size_t steps, double h,
                                                     std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  constexpr double kDay = 86400.0;
  const double rho = std::exp(-h / (2.0 * kDay));
  const double weather_std = 3.0;

  std::vector<double> solar_peak(n), heat_power(n), cool_power(n);
  for (std::size_t i = 0; i < n; ++i) {
    solar_peak[i] = 300.0 + 100.0 * static_cast<double>(i % 3);
    heat_power[i] = 500.0 + 50.0 * static_cast<double>(i % 2);
    cool_power[i] = 350.0;
  }

  // Piecewise-constant actuator schedules: each zone redraws its level after
  // a random 2-8 h hold.
  std::vector<double> heat_level(n, 0.0), cool_level(n, 0.0);
  std::vector<double> heat_left(n, 0.0), cool_left(n, 0.0);
  double weather = 0.0;
  double cloud = 1.0;
  long current_day = -1;

  std::vector<core::InputVector> out;
  out.reserve(steps);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const double day = t / kDay;
    const long day_index = static_cast<long>(std::floor(day));
    if (day_index != current_day) {
      current_day = day_index;
      cloud = 0.2 + 0.8 * unif(rng);
    }
    weather = rho * weather + weather_std * std::sqrt(1.0 - rho * rho) * normal(rng);
    const double phase = day - std::floor(day);
    const double t_ext = 283.15 + 7.0 * std::sin(2.0 * std::numbers::pi * (phase - 0.375)) + weather;

    BuildingInputs in;
    in.t_ext = t_ext;
    for (std::size_t i = 0; i < n; ++i) {
      if (heat_left[i] <= 0.0) {
        const double r = unif(rng);
        heat_level[i] = r < 0.4 ? 0.0 : (r < 0.7 ? 0.5 : 1.0);
        heat_left[i] = 7200.0 + 21600.0 * unif(rng);
      }
      if (cool_left[i] <= 0.0) {
        cool_level[i] = unif(rng) < 0.3 ? 1.0 : 0.0;
        cool_left[i] = 7200.0 + 21600.0 * unif(rng);
      }
      heat_left[i] -= h;
      cool_left[i] -= h;
      // Windows face east, south, west in turn: peak shifted by 1.3 h, sharper for larger panes.
      const double shift = (static_cast<double>(i % 3) - 1.0) * 1.3 / 24.0;
      const double sun = std::pow(std::max(0.0, std::sin(2.0 * std::numbers::pi * (phase - 0.25 - shift))),
                                  1.0 + 0.5 * static_cast<double>(i % 3));
      in.q_solar.push_back(solar_peak[i] * cloud * sun);
      in.q_heat.push_back(heat_power[i] * heat_level[i]);
      in.q_cool.push_back(cool_level[i] > 0.0 ? -cool_power[i] * cool_level[i] : 0.0);
    }
    out.push_back(in.flatten());
  }
  return out;
}

data::Trajectory synth_building_generate(const BuildingParams& truth,
                                         std::span<const core::InputVector> inputs,
                                         std::span<const double> t0, double h,
                                         std::size_t substeps) {
  if (!(h > 0.0)) throw Error("synth_building_generate: h must be positive");
  if (substeps == 0) throw Error("synth_building_generate: substeps must be >= 1");
  const BuildingModel model(truth);
  const double dt = h / static_cast<double>(substeps);

  data::Trajectory traj;
  traj.h = h;
  traj.state_labels = model.output_labels();
  traj.input_labels = model.input_labels();
  auto s = entropy_from_temperature(truth, t0);
  traj.states.push_back(temperature_from_entropy(truth, s));
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    try {
      for (std::size_t sub = 0; sub < substeps; ++sub) {
        const auto ds = model.rhs(s, inputs[k]);
        for (std::size_t i = 0; i < s.size(); ++i) s[i] += dt * ds[i];
      }
      auto t = temperature_from_entropy(truth, s);
      for (double v : t)
        if (!std::isfinite(v)) throw NumericError("non-finite temperature", s);
      traj.states.push_back(std::move(t));
    } catch (const NumericError& e) {
      throw NumericError("synth_building_generate diverged at step " + std::to_string(k) + ": " +
                         e.what(), e.state);
    }
    traj.inputs.push_back(inputs[k]);
  }
  traj.metadata["source"] = "synthetic-building";
  traj.metadata["substeps"] = std::to_string(substeps);
  return traj;
}

BuildingParams reference_building(std::size_t n) {
  const auto adj = Adjacency::chain(n);
  std::vector<double> edge, ext, bs, bh, bc;
  const double edge_v[] = {40.0, 30.0, 35.0};
  const double ext_v[] = {25.0, 35.0, 20.0};
  const double bs_v[] = {2.0e-3, 2.5e-3, 1.8e-3};
  const double bh_v[] = {3.3e-3, 3.2e-3, 3.4e-3};
  const double bc_v[] = {3.0e-3, 3.1e-3, 2.9e-3};
  for (std::size_t k = 0; k < adj.edges().size(); ++k) edge.push_back(edge_v[k % 3]);
  for (std::size_t i = 0; i < n; ++i) {
    ext.push_back(ext_v[i % 3]);
    bs.push_back(bs_v[i % 3]);
    bh.push_back(bh_v[i % 3]);
    bc.push_back(bc_v[i % 3]);
  }
  return BuildingParams::from_effective(adj, edge, ext, bs, bh, bc, std::vector<double>(n, 1e6),
                                        std::vector<double>(n, 293.15), std::vector<double>(n, 0.0));
}

}  // namespace iphs::building
