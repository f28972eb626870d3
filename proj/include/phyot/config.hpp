#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "phyot/simulator.hpp"
#include "phyot/tracker.hpp"

namespace phyot {

/// Flat `key = value` text with `[section]` headers; keys are stored as
/// "section.key" (or bare "key" before the first header). `#` and `;` start
/// comment lines.
class Config {
public:
  static Config parse(std::string_view text);
  static Config load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::string get(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  void set(const std::string& key, std::string value) { values_[key] = std::move(value); }

  const std::map<std::string, std::string>& values() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

/// [scenario] and [noise] sections. Unknown keys are rejected.
ScenarioSpec scenario_from_config(const Config& config);
std::string scenario_to_config(const ScenarioSpec& spec);

/// [tracker], [kalman], [flow] and [mask] sections. Unknown keys are rejected.
TrackerConfig tracker_from_config(const Config& config);

}  // namespace phyot
