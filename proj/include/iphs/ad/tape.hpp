#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace iphs::ad {

using NodeId = std::uint32_t;
inline constexpr NodeId kNoParent = std::numeric_limits<NodeId>::max();

enum class Op : std::uint8_t {
  Leaf,
  Add,
  Sub,
  Mul,
  Div,
  AddConst,  // a + c
  MulConst,  // a * c
  DivConst,  // a / c
  ConstSub,  // c - a
  ConstDiv,  // c / a
  Neg,
  Exp,
  Log,
  PowConst,  // a ^ c
  Tanh,
  Sigmoid,
  Softplus,
  LogCosh,
  Abs,
  Sqrt,
};

/// Forward value of a primitive. Shared by recording and replay so both
/// produce identical bits.
double apply(Op op, double a, double b, double c);

/// Append-only record of scalar operations for reverse-mode differentiation.
///
/// Parents of node k always have indices < k, so a single reverse sweep over
/// the node list is a valid topological order.
class Tape {
 public:
  NodeId leaf(double value) {
    nodes_.push_back({Op::Leaf, {kNoParent, kNoParent}, {0.0, 0.0}, 0.0});
    values_.push_back(value);
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  NodeId unary(Op op, NodeId a, double value, double da, double constant = 0.0) {
    nodes_.push_back({op, {a, kNoParent}, {da, 0.0}, constant});
    values_.push_back(value);
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  NodeId binary(Op op, NodeId a, NodeId b, double value, double da, double db) {
    nodes_.push_back({op, {a, b}, {da, db}, 0.0});
    values_.push_back(value);
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  double value(NodeId id) const { return values_[id]; }
  std::size_t size() const noexcept { return nodes_.size(); }
  Op op(NodeId id) const { return nodes_[id].op; }
  NodeId parent(NodeId id, int which) const { return nodes_[id].parent[which]; }

  void clear() {
    nodes_.clear();
    values_.clear();
  }
  void reserve(std::size_t n) {
    nodes_.reserve(n);
    values_.reserve(n);
  }

  /// Reverse accumulation from a scalar output. Returns one adjoint per node;
  /// entry k is d(output)/d(node k).
  std::vector<double> backward(NodeId output) const;

  /// Adjoints restricted to the given leaves, in the order given.
  std::vector<double> gradient(NodeId output, std::span<const NodeId> leaves) const;

  /// Recompute every node value from new leaf values (in leaf creation
  /// order). With the recorded leaf values this reproduces the tape bit-for-bit.
  std::vector<double> replay(std::span<const double> leaf_values) const;

  std::size_t leaf_count() const;

 private:
  struct Node {
    Op op;
    NodeId parent[2];
    double partial[2];
    double constant;
  };

  std::vector<Node> nodes_;
  std::vector<double> values_;
};

}  // namespace iphs::ad
