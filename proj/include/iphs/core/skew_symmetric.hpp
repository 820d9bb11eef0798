#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <utility>
#include <vector>

namespace iphs::core {

/// Skew-symmetric matrix stored by its strict upper triangle.
///
/// Only entries (i, j) with i < j are stored; the lower triangle is the exact
/// negation of the stored value and the diagonal is identically zero, so
/// M + Mᵀ = 0 holds bit-for-bit for every materialisation.
class SkewSymmetricMatrix {
 public:
  explicit SkewSymmetricMatrix(std::size_t dim) : dim_(dim) {}

  std::size_t dim() const noexcept { return dim_; }

  /// Sets M(i, j) = value, and therefore M(j, i) = -value. i == j is rejected.
  void set(std::size_t i, std::size_t j, double value);
  double get(std::size_t i, std::size_t j) const;

  const std::map<std::pair<std::size_t, std::size_t>, double>& upper_entries() const noexcept {
    return upper_;
  }

  /// Dense row-major n×n copy.
  std::vector<double> materialize() const;

  /// M·x
  std::vector<double> apply(std::span<const double> x) const;

  /// xᵀ·M·y
  double bilinear(std::span<const double> x, std::span<const double> y) const;

 private:
  std::size_t dim_;
  std::map<std::pair<std::size_t, std::size_t>, double> upper_;
};

}  // namespace iphs::core
