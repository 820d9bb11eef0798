#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "iphs/core/dynamics_model.hpp"

namespace iphs::data {

/// Uniformly sampled record of L+1 states and the L inputs applied between them.
struct Trajectory {
  double t0 = 0.0;
  double h = 1.0;
  std::vector<std::vector<double>> states;  // (L+1) × n
  std::vector<std::vector<double>> inputs;  // L × m
  std::vector<core::Label> state_labels;
  std::vector<core::Label> input_labels;
  std::map<std::string, std::string> metadata;

  std::size_t steps() const noexcept { return inputs.size(); }
  std::size_t samples() const noexcept { return states.size(); }
  std::size_t state_dim() const noexcept { return states.empty() ? 0 : states.front().size(); }
  std::size_t input_dim() const noexcept { return inputs.empty() ? input_labels.size() : inputs.front().size(); }
  double time(std::size_t k) const noexcept { return t0 + static_cast<double>(k) * h; }

  /// Throws DimensionError if row counts or widths are inconsistent.
  void validate() const;
};

}  // namespace iphs::data
