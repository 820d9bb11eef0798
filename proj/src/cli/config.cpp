#include "iphs/cli/config.hpp"

#include <cmath>

#include "iphs/data/dataset.hpp"
#include "iphs/error.hpp"

namespace iphs::cli {

Config Config::load(const std::string& path) { return Config(data::read_metadata(path)); }

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  const std::string v = it == values_.end() ? fallback : it->second;
  resolved_[key] = v;
  return v;
}

std::string Config::require(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) throw ParseError("config key '" + key + "' is required");
  resolved_[key] = it->second;
  return it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    resolved_[key] = data::format_double(fallback);
    return fallback;
  }
  try {
    const double v = data::parse_double(it->second);
    resolved_[key] = it->second;
    return v;
  } catch (const ParseError& e) {
    throw ParseError("config key '" + key + "': " + e.what());
  }
}

std::optional<double> Config::get_optional_double(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end() || it->second == "none") {
    resolved_[key] = "none";
    return std::nullopt;
  }
  return get_double(key, 0.0);
}

std::size_t Config::get_count(const std::string& key, std::size_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    resolved_[key] = std::to_string(fallback);
    return fallback;
  }
  const double v = get_double(key, 0.0);
  if (!(v >= 0.0) || v != std::floor(v) || v > 1e15)
    throw ParseError("config key '" + key + "' must be a non-negative integer, got '" + it->second + "'");
  return static_cast<std::size_t>(v);
}

std::uint64_t Config::get_seed() const { return static_cast<std::uint64_t>(get_count("seed", 0)); }

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    resolved_[key] = fallback ? "true" : "false";
    return fallback;
  }
  resolved_[key] = it->second;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw ParseError("config key '" + key + "' must be true or false, got '" + it->second + "'");
}

std::vector<double> Config::get_doubles(const std::string& key,
                                        const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    resolved_[key] = data::format_double_list(fallback);
    return fallback;
  }
  try {
    auto v = data::parse_double_list(it->second);
    resolved_[key] = it->second;
    return v;
  } catch (const ParseError& e) {
    throw ParseError("config key '" + key + "': " + e.what());
  }
}

std::vector<std::string> Config::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_)
    if (!resolved_.contains(k)) out.push_back(k);
  return out;
}

}  // namespace iphs::cli
