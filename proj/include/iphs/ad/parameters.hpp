#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace iphs::ad {

struct Segment {
  std::string name;
  std::size_t offset = 0;
  std::size_t length = 0;
};

/// Flat trainable vector with named, contiguous groups.
///
/// Segments are appended in order, so they are disjoint and cover [0, size())
/// by construction. The gradient buffer always has the same length as values.
class ParameterVector {
 public:
  /// Appends a new named group initialised with `init`. Names must be unique.
  void add_segment(std::string name, std::span<const double> init);

  bool has_segment(std::string_view name) const;
  const Segment& segment_info(std::string_view name) const;
  std::span<double> segment(std::string_view name);
  std::span<const double> segment(std::string_view name) const;
  const std::vector<Segment>& segments() const noexcept { return segments_; }

  std::size_t size() const noexcept { return values_.size(); }
  std::vector<double>& values() noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }
  std::vector<double>& gradient() noexcept { return gradient_; }
  const std::vector<double>& gradient() const noexcept { return gradient_; }

  /// Replaces all values; the length must match.
  void assign(std::span<const double> values);

 private:
  std::vector<Segment> segments_;
  std::vector<double> values_;
  std::vector<double> gradient_;
};

using ScalarFunction = std::function<double(std::span<const double>)>;

/// Central-difference gradient (f(θ+εeᵢ) − f(θ−εeᵢ)) / 2ε, coordinate by coordinate.
/// Throws NumericError naming the coordinate when f is non-finite.
std::vector<double> finite_diff_gradient(const ScalarFunction& f, std::span<const double> theta,
                                         double eps);

}  // namespace iphs::ad
