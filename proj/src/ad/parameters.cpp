#include "iphs/ad/parameters.hpp"

#include <algorithm>
#include <cmath>

#include "iphs/error.hpp"

namespace iphs::ad {

void ParameterVector::add_segment(std::string name, std::span<const double> init) {
  if (has_segment(name)) throw Error("duplicate parameter segment '" + name + "'");
  segments_.push_back({std::move(name), values_.size(), init.size()});
  values_.insert(values_.end(), init.begin(), init.end());
  gradient_.resize(values_.size(), 0.0);
}

bool ParameterVector::has_segment(std::string_view name) const {
  return std::any_of(segments_.begin(), segments_.end(),
                     [&](const Segment& s) { return s.name == name; });
}

const Segment& ParameterVector::segment_info(std::string_view name) const {
  for (const auto& s : segments_)
    if (s.name == name) return s;
  throw Error("unknown parameter segment '" + std::string(name) + "'");
}

std::span<double> ParameterVector::segment(std::string_view name) {
  const auto& s = segment_info(name);
  return std::span<double>(values_).subspan(s.offset, s.length);
}

std::span<const double> ParameterVector::segment(std::string_view name) const {
  const auto& s = segment_info(name);
  return std::span<const double>(values_).subspan(s.offset, s.length);
}

void ParameterVector::assign(std::span<const double> values) {
  if (values.size() != values_.size())
    throw DimensionError("parameter vector", values_.size(), values.size());
  std::copy(values.begin(), values.end(), values_.begin());
}

std::vector<double> finite_diff_gradient(const ScalarFunction& f, std::span<const double> theta,
                                         double eps) {
  if (!(eps > 0.0)) throw Error("finite_diff_gradient: eps must be positive");
  std::vector<double> probe(theta.begin(), theta.end());
  std::vector<double> grad(theta.size());
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double orig = probe[i];
    probe[i] = orig + eps;
    const double fp = f(probe);
    probe[i] = orig - eps;
    const double fm = f(probe);
    probe[i] = orig;
    if (!std::isfinite(fp) || !std::isfinite(fm))
      throw NumericError("non-finite function value at coordinate " + std::to_string(i));
    grad[i] = (fp - fm) / (2.0 * eps);
  }
  return grad;
}

}  // namespace iphs::ad
