#include "iphs/ad/tape.hpp"

#include <cmath>
#include <numbers>

#include "iphs/error.hpp"

namespace iphs::ad {

double apply(Op op, double a, double b, double c) {
  switch (op) {
    case Op::Leaf: return a;
    case Op::Add: return a + b;
    case Op::Sub: return a - b;
    case Op::Mul: return a * b;
    case Op::Div: return a / b;
    case Op::AddConst: return a + c;
    case Op::MulConst: return a * c;
    case Op::DivConst: return a / c;
    case Op::ConstSub: return c - a;
    case Op::ConstDiv: return c / a;
    case Op::Neg: return -a;
    case Op::Exp: return std::exp(a);
    case Op::Log: return std::log(a);
    case Op::PowConst: return std::pow(a, c);
    case Op::Tanh: return std::tanh(a);
    case Op::Sigmoid:
      if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
      else {
        const double e = std::exp(a);
        return e / (1.0 + e);
      }
    case Op::Softplus: return std::max(a, 0.0) + std::log1p(std::exp(-std::fabs(a)));
    case Op::LogCosh: {
      const double x = std::fabs(a);
      if (x < 1.0) {
        // cosh x - 1 = 2 sinh^2(x/2), no cancellation near zero
        const double s = std::sinh(0.5 * x);
        return std::log1p(2.0 * s * s);
      }
      return x + std::log1p(std::exp(-2.0 * x)) - std::numbers::ln2;
    }
    case Op::Abs: return std::fabs(a);
    case Op::Sqrt: return std::sqrt(a);
  }
  return a;
}

std::vector<double> Tape::backward(NodeId output) const {
  std::vector<double> adj(nodes_.size(), 0.0);
  if (output >= nodes_.size()) return adj;
  adj[output] = 1.0;
  for (std::size_t k = output + 1; k-- > 0;) {
    const double g = adj[k];
    if (g == 0.0) continue;
    const Node& n = nodes_[k];
    if (n.parent[0] != kNoParent) adj[n.parent[0]] += g * n.partial[0];
    if (n.parent[1] != kNoParent) adj[n.parent[1]] += g * n.partial[1];
  }
  return adj;
}

std::vector<double> Tape::gradient(NodeId output, std::span<const NodeId> leaves) const {
  const auto adj = backward(output);
  std::vector<double> g;
  g.reserve(leaves.size());
  for (NodeId id : leaves) g.push_back(adj.at(id));
  return g;
}

std::size_t Tape::leaf_count() const {
  std::size_t n = 0;
  for (const auto& node : nodes_) n += node.op == Op::Leaf;
  return n;
}

std::vector<double> Tape::replay(std::span<const double> leaf_values) const {
  std::vector<double> out(nodes_.size());
  std::size_t next_leaf = 0;
  for (std::size_t k = 0; k < nodes_.size(); ++k) {
    const Node& n = nodes_[k];
    if (n.op == Op::Leaf) {
      if (next_leaf >= leaf_values.size())
        throw DimensionError("replay leaf values", leaf_count(), leaf_values.size());
      out[k] = leaf_values[next_leaf++];
      continue;
    }
    const double a = out[n.parent[0]];
    const double b = n.parent[1] != kNoParent ? out[n.parent[1]] : 0.0;
    out[k] = apply(n.op, a, b, n.constant);
  }
  if (next_leaf != leaf_values.size())
    throw DimensionError("replay leaf values", next_leaf, leaf_values.size());
  return out;
}

}  // namespace iphs::ad
