#include "iphs/baselines/vanilla_node.hpp"

#include <cmath>
#include <random>

#include "iphs/error.hpp"

namespace iphs::baselines {

VanillaNode::VanillaNode(std::size_t state_dim, std::size_t input_dim, std::size_t hidden,
                         std::uint64_t seed, bool use_inputs)
    : n_(state_dim), m_(input_dim), hidden_(hidden), use_inputs_(use_inputs) {
  if (n_ == 0 || hidden_ == 0) throw Error("VanillaNode: dimensions must be positive");
  const std::size_t in = n_ + (use_inputs_ ? m_ : 0);
  std::mt19937_64 rng(seed);
  auto layer = [&](std::size_t fan_in, std::size_t count) {
    std::uniform_real_distribution<double> d(-1.0 / std::sqrt(static_cast<double>(fan_in)),
                                             1.0 / std::sqrt(static_cast<double>(fan_in)));
    std::vector<double> v(count);
    for (auto& w : v) w = d(rng);
    return v;
  };
  params_.add_segment("W1", layer(in, hidden_ * in));
  params_.add_segment("b1", layer(in, hidden_));
  params_.add_segment("W2", layer(hidden_, hidden_ * hidden_));
  params_.add_segment("b2", layer(hidden_, hidden_));
  params_.add_segment("W3", layer(hidden_, n_ * hidden_));
  params_.add_segment("b3", layer(hidden_, n_));
}

std::unique_ptr<core::TrainableModel> VanillaNode::clone() const {
  return std::make_unique<VanillaNode>(*this);
}

template <class S>
std::vector<S> VanillaNode::forward(std::span<const S> theta, std::span<const S> x,
                                    std::span<const double> u) const {
  if (x.size() != n_) throw DimensionError("vanilla NODE state", n_, x.size());
  if (u.size() != m_) throw DimensionError("vanilla NODE input", m_, u.size());
  const std::size_t in = n_ + (use_inputs_ ? m_ : 0);
  std::vector<S> a(x.begin(), x.end());
  if (use_inputs_)
    for (double v : u) a.push_back(S(v));

  std::size_t off = 0;
  auto dense = [&](const std::vector<S>& input, std::size_t fan_in, std::size_t fan_out,
                   bool activate) {
    const auto w = theta.subspan(off, fan_out * fan_in);
    const auto b = theta.subspan(off + fan_out * fan_in, fan_out);
    off += fan_out * fan_in + fan_out;
    std::vector<S> out;
    out.reserve(fan_out);
    for (std::size_t r = 0; r < fan_out; ++r) {
      S z = b[r];
      for (std::size_t c = 0; c < fan_in; ++c) z += w[r * fan_in + c] * input[c];
      out.push_back(activate ? ad::tanh(z) : z);
    }
    return out;
  };
  const auto h1 = dense(a, in, hidden_, true);
  const auto h2 = dense(h1, hidden_, hidden_, true);
  return dense(h2, hidden_, n_, false);
}

core::StateVector VanillaNode::rhs(std::span<const double> x, std::span<const double> u) const {
  return forward<double>(params_.values(), x, u);
}

std::vector<ad::Var> VanillaNode::rhs_tape(std::span<const ad::Var> theta,
                                           std::span<const ad::Var> x,
                                           std::span<const double> u) const {
  return forward<ad::Var>(theta, x, u);
}

void VanillaNode::set_labels(std::vector<core::Label> states, std::vector<core::Label> inputs) {
  if (states.size() != n_) throw DimensionError("vanilla NODE state labels", n_, states.size());
  if (inputs.size() != m_) throw DimensionError("vanilla NODE input labels", m_, inputs.size());
  state_labels_ = std::move(states);
  input_labels_ = std::move(inputs);
}

std::vector<core::Label> VanillaNode::state_labels() const {
  return state_labels_.empty() ? DynamicsModel::state_labels() : state_labels_;
}

std::vector<core::Label> VanillaNode::input_labels() const {
  return input_labels_.empty() ? DynamicsModel::input_labels() : input_labels_;
}

}  // namespace iphs::baselines
