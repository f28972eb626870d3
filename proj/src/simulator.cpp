#include "phyot/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "phyot/error.hpp"

namespace phyot {

namespace {

constexpr double kMaxTurnRate = std::numbers::pi / 6.0;

struct Blob {
  double x, y, inv_two_sigma2, amplitude;
};

/// Smooth band-limited pattern: a sum of Gaussian blobs remapped to [lo, hi].
class BlobTexture {
public:
  BlobTexture(std::uint64_t seed, double width, double height, int count, double sigma_lo,
              double sigma_hi, double lo, double hi) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(0.0, width), uy(0.0, height);
    std::uniform_real_distribution<double> us(sigma_lo, sigma_hi), ua(-1.0, 1.0);
    for (int i = 0; i < count; ++i) {
      const double s = us(rng);
      blobs_.push_back({ux(rng), uy(rng), 1.0 / (2.0 * s * s), ua(rng)});
    }
    double mn = std::numeric_limits<double>::max(), mx = std::numeric_limits<double>::lowest();
    for (double y = 0.0; y <= height; y += 0.25) {
      for (double x = 0.0; x <= width; x += 0.25) {
        const double v = raw(x, y);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
      }
    }
    offset_ = mn;
    scale_ = mx > mn ? (hi - lo) / (mx - mn) : 0.0;
    lo_ = lo;
  }

  double operator()(double x, double y) const {
    return std::clamp(lo_ + (raw(x, y) - offset_) * scale_, 0.0, 1.0);
  }

private:
  double raw(double x, double y) const {
    double sum = 0.0;
    for (const auto& b : blobs_) {
      const double dx = x - b.x, dy = y - b.y;
      sum += b.amplitude * std::exp(-(dx * dx + dy * dy) * b.inv_two_sigma2);
    }
    return sum;
  }

  std::vector<Blob> blobs_;
  double offset_ = 0.0, scale_ = 0.0, lo_ = 0.0;
};

BlobTexture target_texture(const ScenarioSpec& spec) {
  return BlobTexture(spec.texture_seed, spec.target_w, spec.target_h, 12, 2.0, 4.0, 0.1, 0.9);
}

double overlap_1d(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

/// Area-weighted blend of the texture into the pixels the box covers.
void draw_textured(Grid& img, const BoundingBox& box, const BlobTexture& texture) {
  const int x0 = std::max(0, static_cast<int>(std::floor(box.left())));
  const int y0 = std::max(0, static_cast<int>(std::floor(box.top())));
  const int x1 = std::min(img.width(), static_cast<int>(std::ceil(box.right())));
  const int y1 = std::min(img.height(), static_cast<int>(std::ceil(box.bottom())));
  for (int y = y0; y < y1; ++y) {
    const double cy = overlap_1d(y, y + 1.0, box.top(), box.bottom());
    for (int x = x0; x < x1; ++x) {
      const double alpha = cy * overlap_1d(x, x + 1.0, box.left(), box.right());
      if (alpha <= 0.0) continue;
      const double t = texture(x + 0.5 - box.left(), y + 0.5 - box.top());
      img(x, y) = alpha >= 1.0 ? t : (1.0 - alpha) * img(x, y) + alpha * t;
    }
  }
}

void fill_rect(Grid& img, double left, double top, double right, double bottom, double value) {
  const int x0 = std::max(0, static_cast<int>(std::floor(left)));
  const int y0 = std::max(0, static_cast<int>(std::floor(top)));
  const int x1 = std::min(img.width(), static_cast<int>(std::ceil(right)));
  const int y1 = std::min(img.height(), static_cast<int>(std::ceil(bottom)));
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) img(x, y) = value;
  }
}

Grid render_background(const ScenarioSpec& spec) {
  constexpr double kMean = 0.45;
  Grid bg(spec.width, spec.height, kMean);
  if (spec.background_contrast <= 0.0) return bg;
  const BlobTexture noise(spec.seed ^ 0x9e3779b97f4a7c15ULL, spec.width, spec.height,
                          std::max(8, spec.width * spec.height / 256), 4.0, 10.0,
                          kMean - 0.5 * spec.background_contrast,
                          kMean + 0.5 * spec.background_contrast);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) bg(x, y) = noise(x + 0.5, y + 0.5);
  }
  return bg;
}

/// Constant-velocity walkers reflected at the frame border.
std::vector<std::vector<BoundingBox>> distractor_tracks(const ScenarioSpec& spec,
                                                        const std::vector<BoundingBox>& target) {
  std::vector<std::vector<BoundingBox>> per_frame(static_cast<std::size_t>(spec.frames));
  if (spec.distractors == 0) return per_frame;

  std::mt19937_64 rng(spec.seed * 0x2545F4914F6CDD1DULL + 17);
  const double hw = 0.5 * spec.target_w, hh = 0.5 * spec.target_h;
  std::uniform_real_distribution<double> ux(hw, spec.width - hw), uy(hh, spec.height - hh);
  std::uniform_real_distribution<double> speed(0.5, 2.0), angle(0.0, 2.0 * std::numbers::pi);

  for (int d = 0; d < spec.distractors; ++d) {
    double x = ux(rng), y = uy(rng);
    for (int attempt = 0; attempt < 100; ++attempt) {
      if (std::hypot(x - target[0].cx, y - target[0].cy) > 1.5 * std::max(spec.target_w, spec.target_h)) {
        break;
      }
      x = ux(rng);
      y = uy(rng);
    }
    const double s = speed(rng), th = angle(rng);
    double vx = s * std::cos(th), vy = s * std::sin(th);
    for (int t = 0; t < spec.frames; ++t) {
      per_frame[static_cast<std::size_t>(t)].push_back({x, y, spec.target_w, spec.target_h});
      x += vx;
      y += vy;
      if (x < hw) { x = 2.0 * hw - x; vx = -vx; }
      if (x > spec.width - hw) { x = 2.0 * (spec.width - hw) - x; vx = -vx; }
      if (y < hh) { y = 2.0 * hh - y; vy = -vy; }
      if (y > spec.height - hh) { y = 2.0 * (spec.height - hh) - y; vy = -vy; }
    }
  }
  return per_frame;
}

}  // namespace

const char* to_string(MotionKind kind) {
  switch (kind) {
    case MotionKind::ConstantVelocity: return "constant-velocity";
    case MotionKind::ConstantAcceleration: return "constant-acceleration";
    case MotionKind::Turning: return "turning";
  }
  return "unknown";
}

MotionKind parse_motion_kind(const std::string& text) {
  if (text == "constant-velocity" || text == "cv") return MotionKind::ConstantVelocity;
  if (text == "constant-acceleration" || text == "ca") return MotionKind::ConstantAcceleration;
  if (text == "turning") return MotionKind::Turning;
  throw Error(ErrorCode::InvalidInput, "unknown motion kind '" + text + "'");
}

void NoiseSpec::validate() const {
  if (!(position_sigma >= 0.0) || !std::isfinite(position_sigma)) {
    throw Error(ErrorCode::InvalidInput, "noise position_sigma must be >= 0");
  }
  for (double p : {dropout, swap}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw Error(ErrorCode::InvalidInput, "noise probabilities must lie in [0, 1]");
    }
  }
}

void ScenarioSpec::validate() const {
  if (frames < 2) throw Error(ErrorCode::InvalidInput, "scenario needs >= 2 frames");
  if (width < 8 || height < 8) throw Error(ErrorCode::InvalidInput, "frame must be >= 8x8");
  if (!(target_w > 0.0 && target_h > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "target extent must be positive");
  }
  if (!initial.finite() || !accel.finite() || !std::isfinite(turn_rate)) {
    throw Error(ErrorCode::InvalidInput, "scenario motion parameters must be finite");
  }
  if (std::abs(turn_rate) > kMaxTurnRate + 1e-12) {
    throw Error(ErrorCode::InvalidInput, "turn rate exceeds pi/6 per frame");
  }
  if (distractors < 0) throw Error(ErrorCode::InvalidInput, "distractor count must be >= 0");
  for (const auto& r : occlusions) {
    if (r.first < 0 || r.last < r.first || r.last >= frames) {
      throw Error(ErrorCode::InvalidInput, "occlusion interval outside the sequence");
    }
  }
  if (!(background_contrast >= 0.0 && background_contrast <= 0.9)) {
    throw Error(ErrorCode::InvalidInput, "background_contrast must lie in [0, 0.9]");
  }
  if (!(occluder_intensity >= 0.0 && occluder_intensity <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "occluder_intensity must lie in [0, 1]");
  }
  noise.validate();
}

GroundTruth generate_trajectory(const ScenarioSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(spec.frames);
  const double c = std::cos(spec.turn_rate), s = std::sin(spec.turn_rate);

  GroundTruth truth;
  truth.states.reserve(n);
  truth.accels.reserve(n);
  StateVector x = spec.initial;
  for (std::size_t t = 0; t < n; ++t) {
    truth.states.push_back(x);
    Acceleration a;
    switch (spec.motion) {
      case MotionKind::ConstantVelocity: break;
      case MotionKind::ConstantAcceleration: a = spec.accel; break;
      case MotionKind::Turning:
        a = {c * x.vx - s * x.vy - x.vx, s * x.vx + c * x.vy - x.vy};
        break;
    }
    truth.accels.push_back(a);
    x = {x.px + x.vx, x.py + x.vy, x.vx + a.ax, x.vy + a.ay};
  }
  for (const auto& st : truth.states) {
    truth.boxes.push_back({st.px, st.py, spec.target_w, spec.target_h});
  }
  truth.distractors = distractor_tracks(spec, truth.boxes);
  truth.occluded.assign(n, false);
  for (const auto& r : spec.occlusions) {
    for (int t = r.first; t <= r.last; ++t) truth.occluded[static_cast<std::size_t>(t)] = true;
  }
  return truth;
}

bool in_bounds(const GroundTruth& truth, const ScenarioSpec& spec) {
  return std::all_of(truth.boxes.begin(), truth.boxes.end(), [&](const BoundingBox& b) {
    return b.left() >= 0.0 && b.top() >= 0.0 && b.right() <= spec.width &&
           b.bottom() <= spec.height;
  });
}

std::vector<GrayImage> render_scene(const GroundTruth& truth, const ScenarioSpec& spec) {
  spec.validate();
  if (truth.size() != static_cast<std::size_t>(spec.frames) ||
      truth.distractors.size() != truth.size()) {
    throw Error(ErrorCode::InvalidInput, "render_scene: truth does not match the scenario");
  }
  if (!in_bounds(truth, spec)) {
    throw Error(ErrorCode::InvalidInput, "render_scene: target leaves the frame");
  }

  const Grid background = render_background(spec);
  const BlobTexture texture = target_texture(spec);

  std::vector<GrayImage> frames;
  frames.reserve(truth.size());
  for (std::size_t t = 0; t < truth.size(); ++t) {
    Grid img = background;
    for (const auto& d : truth.distractors[t]) draw_textured(img, d, texture);
    draw_textured(img, truth.boxes[t], texture);
    for (const auto& r : spec.occlusions) {
      if (!r.contains(static_cast<int>(t))) continue;
      double l = spec.width, tp = spec.height, rt = 0.0, bt = 0.0;
      for (int k = r.first; k <= r.last; ++k) {
        const auto& b = truth.boxes[static_cast<std::size_t>(k)];
        l = std::min(l, b.left());
        tp = std::min(tp, b.top());
        rt = std::max(rt, b.right());
        bt = std::max(bt, b.bottom());
      }
      fill_rect(img, l - 2.0, tp - 2.0, rt + 2.0, bt + 2.0, spec.occluder_intensity);
    }
    frames.emplace_back(std::move(img));
  }
  return frames;
}

ObservationStream corrupt_observations(const GroundTruth& truth, const NoiseSpec& noise,
                                       std::uint64_t seed) {
  noise.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::normal_distribution<double> gauss(0.0, 1.0);

  ObservationStream out;
  out.reserve(truth.size());
  for (std::size_t t = 0; t < truth.size(); ++t) {
    // Fixed draw count per frame keeps streams aligned across settings.
    const double u_drop = uniform(rng);
    const double u_swap = uniform(rng);
    const double nx = gauss(rng) * noise.position_sigma;
    const double ny = gauss(rng) * noise.position_sigma;

    const bool occluded = t < truth.occluded.size() && truth.occluded[t];
    if (occluded || u_drop < noise.dropout) {
      out.emplace_back(std::nullopt);
      continue;
    }
    BoundingBox box = truth.boxes[t];
    const auto& ds = t < truth.distractors.size() ? truth.distractors[t] : std::vector<BoundingBox>{};
    if (u_swap < noise.swap && !ds.empty()) {
      box = *std::min_element(ds.begin(), ds.end(), [&](const BoundingBox& a, const BoundingBox& b) {
        return std::hypot(a.cx - box.cx, a.cy - box.cy) < std::hypot(b.cx - box.cx, b.cy - box.cy);
      });
    }
    box.cx += nx;
    box.cy += ny;
    out.emplace_back(box);
  }
  return out;
}

std::vector<ScenarioSpec> make_benchmark_suite(int count, std::uint64_t seed,
                                               const SuiteOptions& options) {
  if (count < 1) throw Error(ErrorCode::InvalidInput, "suite needs >= 1 scenario");
  if (options.frames < options.occlusion_length + 14) {
    throw Error(ErrorCode::InvalidInput, "suite frames too short for the occlusion length");
  }
  options.noise.validate();

  std::vector<ScenarioSpec> suite;
  for (int i = 0; i < count; ++i) {
    std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(i));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto between = [&](double lo, double hi) { return lo + (hi - lo) * unit(rng); };

    ScenarioSpec spec;
    spec.motion = static_cast<MotionKind>(i % 3);
    spec.frames = options.frames;
    spec.distractors = options.distractors;
    spec.noise = options.noise;
    spec.name = std::string(to_string(spec.motion)) + "-" + std::to_string(i);

    for (int attempt = 0;; ++attempt) {
      if (attempt > 10000) throw Error(ErrorCode::InvalidInput, "suite: cannot place scenario");
      const double heading = between(0.0, 2.0 * std::numbers::pi);
      double speed = between(0.8, options.max_speed);
      spec.accel = {};
      spec.turn_rate = 0.0;
      if (spec.motion == MotionKind::ConstantAcceleration) {
        speed = between(0.3, 0.8);
        const double mag = between(0.03, 0.08), dir = between(0.0, 2.0 * std::numbers::pi);
        spec.accel = {mag * std::cos(dir), mag * std::sin(dir)};
      } else if (spec.motion == MotionKind::Turning) {
        spec.turn_rate = between(0.05, 0.15) * (unit(rng) < 0.5 ? -1.0 : 1.0);
      }
      spec.initial = {between(20.0, spec.width - 20.0), between(20.0, spec.height - 20.0),
                      speed * std::cos(heading), speed * std::sin(heading)};
      spec.occlusions.clear();
      spec.distractors = 0;
      const GroundTruth truth = generate_trajectory(spec);
      spec.distractors = options.distractors;
      const bool fast = std::any_of(truth.states.begin(), truth.states.end(), [&](const StateVector& s) {
        return std::hypot(s.vx, s.vy) > options.max_speed;
      });
      if (!fast && in_bounds(truth, spec)) break;
    }

    const int first = 8 + static_cast<int>(unit(rng) * (options.frames - options.occlusion_length - 13));
    spec.occlusions.push_back({first, first + options.occlusion_length - 1});
    spec.texture_seed = rng();
    spec.seed = rng();
    suite.push_back(spec);
  }
  return suite;
}

}  // namespace phyot
