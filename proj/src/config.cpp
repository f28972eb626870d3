#include "phyot/config.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "phyot/annotations.hpp"
#include "phyot/error.hpp"

namespace phyot {

namespace {

std::string trimmed(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

void reject_unknown(const Config& config, const std::set<std::string>& sections,
                    const std::set<std::string>& known) {
  for (const auto& [key, value] : config.values()) {
    const auto dot = key.find('.');
    const std::string section = dot == std::string::npos ? "" : key.substr(0, dot);
    if (sections.count(section) && !known.count(key)) {
      throw Error(ErrorCode::Parse, "unknown config key '" + key + "'");
    }
  }
}

std::vector<FrameRange> parse_ranges(const std::string& text) {
  std::vector<FrameRange> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trimmed(item);
    if (item.empty()) continue;
    const auto dash = item.find('-');
    FrameRange r;
    const std::string a = trimmed(item.substr(0, dash));
    const std::string b = dash == std::string::npos ? a : trimmed(item.substr(dash + 1));
    const auto ra = std::from_chars(a.data(), a.data() + a.size(), r.first);
    const auto rb = std::from_chars(b.data(), b.data() + b.size(), r.last);
    if (ra.ec != std::errc{} || rb.ec != std::errc{} || ra.ptr != a.data() + a.size() ||
        rb.ptr != b.data() + b.size()) {
      throw Error(ErrorCode::Parse, "bad frame range '" + item + "' (expected first-last)");
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace

Config Config::parse(std::string_view text) {
  Config config;
  std::string section;
  int line_no = 0;
  std::istringstream in{std::string(text)};
  std::string raw;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trimmed(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ParseError(ErrorCode::Parse, line_no, "malformed section header");
      }
      section = trimmed(std::string_view(line).substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError(ErrorCode::Parse, line_no, "expected key = value");
    const std::string key = trimmed(std::string_view(line).substr(0, eq));
    if (key.empty()) throw ParseError(ErrorCode::Parse, line_no, "empty key");
    config.values_[section.empty() ? key : section + "." + key] =
        trimmed(std::string_view(line).substr(eq + 1));
  }
  return config;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Config::get(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  double v = 0.0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::Parse, "config key '" + key + "' expects a number, got '" + s + "'");
  }
  return v;
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  int v = 0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::Parse, "config key '" + key + "' expects an integer, got '" + s + "'");
  }
  return v;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  std::uint64_t v = 0;
  const auto& s = it->second;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::Parse, "config key '" + key + "' expects an unsigned integer");
  }
  return v;
}

ScenarioSpec scenario_from_config(const Config& c) {
  reject_unknown(c, {"scenario", "noise"},
                 {"scenario.name", "scenario.motion", "scenario.px", "scenario.py", "scenario.vx",
                  "scenario.vy", "scenario.ax", "scenario.ay", "scenario.turn_rate",
                  "scenario.frames", "scenario.width", "scenario.height", "scenario.target_w",
                  "scenario.target_h", "scenario.texture_seed", "scenario.distractors",
                  "scenario.occlusions", "scenario.background_contrast",
                  "scenario.occluder_intensity", "scenario.seed", "noise.sigma", "noise.dropout",
                  "noise.swap"});
  ScenarioSpec s;
  s.name = c.get("scenario.name", s.name);
  s.motion = parse_motion_kind(c.get("scenario.motion", to_string(s.motion)));
  s.initial.px = c.get_double("scenario.px", s.initial.px);
  s.initial.py = c.get_double("scenario.py", s.initial.py);
  s.initial.vx = c.get_double("scenario.vx", s.initial.vx);
  s.initial.vy = c.get_double("scenario.vy", s.initial.vy);
  s.accel.ax = c.get_double("scenario.ax", s.accel.ax);
  s.accel.ay = c.get_double("scenario.ay", s.accel.ay);
  s.turn_rate = c.get_double("scenario.turn_rate", s.turn_rate);
  s.frames = c.get_int("scenario.frames", s.frames);
  s.width = c.get_int("scenario.width", s.width);
  s.height = c.get_int("scenario.height", s.height);
  s.target_w = c.get_double("scenario.target_w", s.target_w);
  s.target_h = c.get_double("scenario.target_h", s.target_h);
  s.texture_seed = c.get_u64("scenario.texture_seed", s.texture_seed);
  s.distractors = c.get_int("scenario.distractors", s.distractors);
  s.occlusions = parse_ranges(c.get("scenario.occlusions", ""));
  s.background_contrast = c.get_double("scenario.background_contrast", s.background_contrast);
  s.occluder_intensity = c.get_double("scenario.occluder_intensity", s.occluder_intensity);
  s.seed = c.get_u64("scenario.seed", s.seed);
  s.noise.position_sigma = c.get_double("noise.sigma", s.noise.position_sigma);
  s.noise.dropout = c.get_double("noise.dropout", s.noise.dropout);
  s.noise.swap = c.get_double("noise.swap", s.noise.swap);
  s.validate();
  return s;
}

std::string scenario_to_config(const ScenarioSpec& s) {
  std::ostringstream out;
  out << "[scenario]\n"
      << "name = " << s.name << '\n'
      << "motion = " << to_string(s.motion) << '\n'
      << "px = " << format_number(s.initial.px) << '\n'
      << "py = " << format_number(s.initial.py) << '\n'
      << "vx = " << format_number(s.initial.vx) << '\n'
      << "vy = " << format_number(s.initial.vy) << '\n'
      << "ax = " << format_number(s.accel.ax) << '\n'
      << "ay = " << format_number(s.accel.ay) << '\n'
      << "turn_rate = " << format_number(s.turn_rate) << '\n'
      << "frames = " << s.frames << '\n'
      << "width = " << s.width << '\n'
      << "height = " << s.height << '\n'
      << "target_w = " << format_number(s.target_w) << '\n'
      << "target_h = " << format_number(s.target_h) << '\n'
      << "texture_seed = " << s.texture_seed << '\n'
      << "distractors = " << s.distractors << '\n'
      << "occlusions = ";
  for (std::size_t i = 0; i < s.occlusions.size(); ++i) {
    out << (i ? ", " : "") << s.occlusions[i].first << '-' << s.occlusions[i].last;
  }
  out << '\n'
      << "background_contrast = " << format_number(s.background_contrast) << '\n'
      << "occluder_intensity = " << format_number(s.occluder_intensity) << '\n'
      << "seed = " << s.seed << '\n'
      << "\n[noise]\n"
      << "sigma = " << format_number(s.noise.position_sigma) << '\n'
      << "dropout = " << format_number(s.noise.dropout) << '\n'
      << "swap = " << format_number(s.noise.swap) << '\n';
  return out.str();
}

TrackerConfig tracker_from_config(const Config& c) {
  reject_unknown(c, {"tracker", "kalman", "flow", "mask"},
                 {"tracker.name", "tracker.mode", "tracker.position_source",
                  "tracker.motion_source", "tracker.search_inflation", "tracker.ncc_min_score",
                  "tracker.gate", "tracker.gate_patience",
                  "kalman.q", "kalman.r_pos", "kalman.r_vel", "kalman.p0", "flow.smoothness",
                  "flow.max_iterations", "flow.eps", "flow.warps", "mask.angle_fraction",
                  "mask.floor"});
  TrackerConfig t;
  t.mode = parse_fusion_mode(c.get("tracker.mode", to_string(t.mode)));
  t.name = c.get("tracker.name", to_string(t.mode));
  const std::string pos = c.get("tracker.position_source", "synthetic");
  if (pos == "synthetic" || pos == "observations") t.position_source = PositionSource::Synthetic;
  else if (pos == "ncc") t.position_source = PositionSource::Ncc;
  else if (pos == "truth") t.position_source = PositionSource::Truth;
  else throw Error(ErrorCode::Parse, "unknown position_source '" + pos + "'");
  const std::string mot = c.get("tracker.motion_source", "flow");
  if (mot == "flow") t.motion_source = MotionSource::Flow;
  else if (mot == "truth") t.motion_source = MotionSource::Truth;
  else throw Error(ErrorCode::Parse, "unknown motion_source '" + mot + "'");
  t.search_inflation = c.get_double("tracker.search_inflation", t.search_inflation);
  t.ncc_min_score = c.get_double("tracker.ncc_min_score", t.ncc_min_score);
  t.gate = c.get_double("tracker.gate", t.gate);
  t.gate_patience = c.get_int("tracker.gate_patience", t.gate_patience);
  t.kalman.process_noise = c.get_double("kalman.q", t.kalman.process_noise);
  t.kalman.position_noise = c.get_double("kalman.r_pos", t.kalman.position_noise);
  t.kalman.velocity_noise = c.get_double("kalman.r_vel", t.kalman.velocity_noise);
  t.kalman.initial_cov = c.get_double("kalman.p0", t.kalman.initial_cov);
  t.flow.smoothness_weight = c.get_double("flow.smoothness", t.flow.smoothness_weight);
  t.flow.max_iterations = c.get_int("flow.max_iterations", t.flow.max_iterations);
  t.flow.convergence_eps = c.get_double("flow.eps", t.flow.convergence_eps);
  t.flow.warps = c.get_int("flow.warps", t.flow.warps);
  t.turn.angle_fraction = c.get_double("mask.angle_fraction", t.turn.angle_fraction);
  t.turn.floor = c.get_double("mask.floor", t.turn.floor);
  t.validate();
  return t;
}

}  // namespace phyot
