#include "iphs/gas/gas_piston.hpp"

#include <cmath>
#include <random>

#include "iphs/error.hpp"

namespace iphs::gas {

double GasPistonTruth::temperature(double s, double v) const {
  if (!(v > 0.0)) throw NumericError("piston bottom reached: gas volume " + std::to_string(v) + " m^3");
  const double c = heat_capacity();
  return t0 * std::exp((s - s0) / c) * std::pow(v / v0, -n_mol() * r_gas / c);
}

double GasPistonTruth::pressure(double s, double v) const {
  return n_mol() * r_gas * temperature(s, v) / v;
}

double GasPistonTruth::total_energy(std::span<const double> x) const {
  return heat_capacity() * temperature(x[0], x[1]) + 0.5 * k_spring * x[2] * x[2] +
         x[3] * x[3] / (2.0 * mass);
}

void GasPistonTruth::validate() const {
  for (double c : {mass, alpha, beta, mu, k_spring, r_gas, c_v, molar_mass, p0, t0, v0})
    if (!(c > 0.0)) throw Error("gas-piston constants must be positive");
}

std::array<double, 4> truth_rhs(const GasPistonTruth& p, std::span<const double> x, double u) {
  if (x.size() != 4) throw DimensionError("gas-piston state", 4, x.size());
  const double v = x[3] / p.mass;
  const double t = p.temperature(x[0], x[1]);
  const double pressure = p.n_mol() * p.r_gas * t / x[1];
  return {p.mu * v * v / t,
          p.alpha * v,
          p.beta * v,
          -p.mu * v + p.alpha * pressure - p.beta * p.k_spring * x[2] + u};
}

core::StateVector GasPistonModel::rhs(std::span<const double> x, std::span<const double> u) const {
  if (u.size() != 1) throw DimensionError("gas-piston input", 1, u.size());
  const auto d = truth_rhs(params_, x, u[0]);
  return {d.begin(), d.end()};
}

double GasPistonModel::hamiltonian(std::span<const double> x) const {
  return params_.total_energy(x);
}

std::vector<double> GasPistonModel::hamiltonian_grad(std::span<const double> x) const {
  return {params_.temperature(x[0], x[1]), -params_.pressure(x[0], x[1]), params_.k_spring * x[2],
          x[3] / params_.mass};
}

double GasPistonModel::entropy_rate(std::span<const double> x) const {
  const double v = x[3] / params_.mass;
  return params_.mu * v * v / params_.temperature(x[0], x[1]);
}

std::vector<core::Label> gas_state_labels() {
  return {{"S", "J/K"}, {"V", "m^3"}, {"q", "m"}, {"p", "kg*m/s"}};
}

std::vector<core::Label> gas_input_labels() { return {{"F", "N"}}; }

std::vector<core::Label> GasPistonModel::state_labels() const { return gas_state_labels(); }
std::vector<core::Label> GasPistonModel::input_labels() const { return gas_input_labels(); }

double log_cosh_hamiltonian(std::span<const double> k, std::span<const double> b,
                            std::span<const double> x) {
  double h = 0.0;
  for (std::size_t r = 0; r < b.size(); ++r) {
    double z = b[r];
    for (std::size_t c = 0; c < 4; ++c) z += k[r * 4 + c] * x[c];
    h += ad::log_cosh(z);
  }
  return h;
}

std::vector<double> log_cosh_hamiltonian_grad(std::span<const double> k, std::span<const double> b,
                                              std::span<const double> x) {
  std::vector<double> g(4, 0.0);
  for (std::size_t r = 0; r < b.size(); ++r) {
    double z = b[r];
    for (std::size_t c = 0; c < 4; ++c) z += k[r * 4 + c] * x[c];
    const double a = std::tanh(z);
    for (std::size_t c = 0; c < 4; ++c) g[c] += k[r * 4 + c] * a;
  }
  return g;
}

LearnedGasPiston::LearnedGasPiston(std::size_t hidden, double gamma_scale, std::uint64_t seed)
    : hidden_(hidden), gamma_scale_(gamma_scale) {
  if (hidden == 0) throw Error("LearnedGasPiston: hidden width must be positive");
  if (!(gamma_scale > 0.0)) throw Error("LearnedGasPiston: gamma_scale must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> init(-0.5, 0.5);
  auto draw = [&](std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = init(rng);
    return v;
  };
  params_.add_segment("H_K", draw(hidden * 4));
  params_.add_segment("H_b", draw(hidden));
  params_.add_segment("gamma_w", draw(8));
  params_.add_segment("gamma_b", std::vector<double>{0.0});
  params_.add_segment("j1", draw(2));
}

std::unique_ptr<core::TrainableModel> LearnedGasPiston::clone() const {
  return std::make_unique<LearnedGasPiston>(*this);
}

template <class S>
std::vector<S> LearnedGasPiston::grad_h_impl(std::span<const S> theta, std::span<const S> x) const {
  const std::size_t nh = hidden_;
  const auto k = theta.subspan(0, nh * 4);
  const auto b = theta.subspan(nh * 4, nh);
  std::vector<S> g(4, S(0.0));
  for (std::size_t r = 0; r < nh; ++r) {
    S z = b[r];
    for (std::size_t c = 0; c < 4; ++c) z += k[r * 4 + c] * x[c];
    const S a = ad::tanh(z);
    for (std::size_t c = 0; c < 4; ++c) g[c] += k[r * 4 + c] * a;
  }
  return g;
}

template <class S>
S LearnedGasPiston::gamma_impl(std::span<const S> theta, std::span<const S> x,
                               std::span<const S> grad_h) const {
  const std::size_t off = hidden_ * 5;
  const auto w = theta.subspan(off, 8);
  S z = theta[off + 8];
  for (std::size_t c = 0; c < 4; ++c) z += w[c] * x[c];
  for (std::size_t c = 0; c < 4; ++c) z += w[4 + c] * grad_h[c];
  return gamma_scale_ * ad::sigmoid(z);
}

template <class S>
std::vector<S> LearnedGasPiston::rhs_impl(std::span<const S> theta, std::span<const S> x,
                                          double u) const {
  if (x.size() != 4) throw DimensionError("gas-piston state", 4, x.size());
  const auto g = grad_h_impl<S>(theta, x);
  const S gamma = gamma_impl<S>(theta, x, g);
  const std::size_t off = hidden_ * 5 + 9;
  const auto d = assemble_rhs<S>(g, gamma, theta[off], theta[off + 1], u);
  return {d.begin(), d.end()};
}

core::StateVector LearnedGasPiston::rhs(std::span<const double> x, std::span<const double> u) const {
  if (u.size() != 1) throw DimensionError("gas-piston input", 1, u.size());
  return rhs_impl<double>(params_.values(), x, u[0]);
}

std::vector<ad::Var> LearnedGasPiston::rhs_tape(std::span<const ad::Var> theta,
                                                std::span<const ad::Var> x,
                                                std::span<const double> u) const {
  if (u.size() != 1) throw DimensionError("gas-piston input", 1, u.size());
  return rhs_impl<ad::Var>(theta, x, u[0]);
}

double LearnedGasPiston::hamiltonian(std::span<const double> x) const {
  return log_cosh_hamiltonian(params_.segment("H_K"), params_.segment("H_b"), x);
}

std::vector<double> LearnedGasPiston::hamiltonian_grad(std::span<const double> x) const {
  return grad_h_impl<double>(params_.values(), x);
}

double LearnedGasPiston::gamma(std::span<const double> x, std::span<const double> grad_h) const {
  return gamma_impl<double>(params_.values(), x, grad_h);
}

double LearnedGasPiston::entropy_rate(std::span<const double> x) const {
  return internal_rhs(x)[0];
}

}  // namespace iphs::gas
