#include "iphs/core/skew_symmetric.hpp"

#include <string>

#include "iphs/error.hpp"

namespace iphs::core {

void SkewSymmetricMatrix::set(std::size_t i, std::size_t j, double value) {
  if (i >= dim_ || j >= dim_)
    throw DimensionError("skew-symmetric index", dim_, std::max(i, j) + 1);
  if (i == j) throw Error("skew-symmetric matrix has a fixed zero diagonal (index " +
                          std::to_string(i) + ")");
  if (i < j)
    upper_[{i, j}] = value;
  else
    upper_[{j, i}] = -value;
}

double SkewSymmetricMatrix::get(std::size_t i, std::size_t j) const {
  if (i == j) return 0.0;
  const bool upper = i < j;
  const auto it = upper_.find(upper ? std::pair{i, j} : std::pair{j, i});
  if (it == upper_.end()) return 0.0;
  return upper ? it->second : -it->second;
}

std::vector<double> SkewSymmetricMatrix::materialize() const {
  std::vector<double> m(dim_ * dim_, 0.0);
  for (const auto& [ij, v] : upper_) {
    m[ij.first * dim_ + ij.second] = v;
    m[ij.second * dim_ + ij.first] = -v;
  }
  return m;
}

std::vector<double> SkewSymmetricMatrix::apply(std::span<const double> x) const {
  if (x.size() != dim_) throw DimensionError("skew-symmetric operand", dim_, x.size());
  std::vector<double> y(dim_, 0.0);
  for (const auto& [ij, v] : upper_) {
    y[ij.first] += v * x[ij.second];
    y[ij.second] -= v * x[ij.first];
  }
  return y;
}

double SkewSymmetricMatrix::bilinear(std::span<const double> x, std::span<const double> y) const {
  if (x.size() != dim_) throw DimensionError("bilinear left operand", dim_, x.size());
  if (y.size() != dim_) throw DimensionError("bilinear right operand", dim_, y.size());
  double acc = 0.0;
  for (const auto& [ij, v] : upper_) acc += v * (x[ij.first] * y[ij.second] - x[ij.second] * y[ij.first]);
  return acc;
}

}  // namespace iphs::core
