#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "phyot/geometry.hpp"
#include "phyot/image.hpp"
#include "phyot/kalman.hpp"

namespace phyot {

enum class MotionKind { ConstantVelocity, ConstantAcceleration, Turning };

const char* to_string(MotionKind kind);
MotionKind parse_motion_kind(const std::string& text);

/// Imperfections of the synthetic position sensor.
struct NoiseSpec {
  double position_sigma = 0.0;
  double dropout = 0.0;
  double swap = 0.0;

  void validate() const;
};

/// Inclusive frame interval.
struct FrameRange {
  int first = 0;
  int last = 0;

  bool contains(int t) const { return t >= first && t <= last; }
  friend bool operator==(const FrameRange&, const FrameRange&) = default;
};

struct ScenarioSpec {
  std::string name = "scenario";
  MotionKind motion = MotionKind::ConstantVelocity;
  StateVector initial{64.0, 64.0, 1.0, 0.0};
  Acceleration accel;
  double turn_rate = 0.0;  // radians/frame
  int frames = 40;
  int width = 128;
  int height = 128;
  double target_w = 16.0;
  double target_h = 16.0;
  std::uint64_t texture_seed = 1;
  int distractors = 0;
  std::vector<FrameRange> occlusions;
  double background_contrast = 0.1;  // 0 gives a flat background
  double occluder_intensity = 0.5;
  std::uint64_t seed = 0;
  NoiseSpec noise;

  void validate() const;
};

/// Ground truth of one scenario. accels[t] is the input driving t -> t+1.
struct GroundTruth {
  std::vector<StateVector> states;
  std::vector<Acceleration> accels;
  std::vector<BoundingBox> boxes;
  std::vector<std::vector<BoundingBox>> distractors;  // per frame
  std::vector<bool> occluded;                         // per frame

  std::size_t size() const { return states.size(); }
};

using ObservationStream = std::vector<std::optional<BoundingBox>>;

/// Iterates the unit-timestep model. Turning rotates the velocity by
/// turn_rate per frame and records a_t = v_{t+1} - v_t.
GroundTruth generate_trajectory(const ScenarioSpec& spec);

/// True when every target box lies fully inside the frame.
bool in_bounds(const GroundTruth& truth, const ScenarioSpec& spec);

/// Static background, distractors, then the target, then active occluders.
/// Deterministic per spec. Throws InvalidInput when the target leaves the frame.
std::vector<GrayImage> render_scene(const GroundTruth& truth, const ScenarioSpec& spec);

/// Per frame: occluded -> absent; with probability dropout -> absent; with
/// probability swap -> nearest distractor box; else truth. Gaussian noise of
/// position_sigma is added to every emitted center.
ObservationStream corrupt_observations(const GroundTruth& truth, const NoiseSpec& noise,
                                       std::uint64_t seed);

struct SuiteOptions {
  int frames = 40;
  int distractors = 2;
  int occlusion_length = 5;
  double max_speed = 2.0;
  NoiseSpec noise{2.0, 0.05, 0.05};
};

/// Seeded mix of constant-velocity, constant-acceleration and turning
/// scenarios with one occlusion each, rejection-sampled to stay in frame.
std::vector<ScenarioSpec> make_benchmark_suite(int count, std::uint64_t seed,
                                               const SuiteOptions& options = {});

}  // namespace phyot
