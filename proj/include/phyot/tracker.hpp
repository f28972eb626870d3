#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "phyot/flow_analysis.hpp"
#include "phyot/geometry.hpp"
#include "phyot/image.hpp"
#include "phyot/kalman.hpp"
#include "phyot/optical_flow.hpp"

namespace phyot {

/// How sensor readings become the reported box.
enum class FusionMode {
  Raw,               // sensor box as-is, lost when the sensor is silent
  Hold,              // sensor box, frozen at the last one during gaps
  ConstantVelocity,  // Kalman fusion with zero acceleration, position sensor only
  PhyOT,             // Kalman fusion with flow velocity and flow acceleration
};

enum class PositionSource { Synthetic, Ncc, Truth };
enum class MotionSource { Flow, Truth };

const char* to_string(FusionMode mode);
FusionMode parse_fusion_mode(const std::string& text);

struct KalmanParams {
  double process_noise = 1e-2;   // Q = q I
  double position_noise = 1.0;   // R diagonal, px^2
  double velocity_noise = 0.25;  // R diagonal, (px/frame)^2
  double initial_cov = 10.0;     // Pi_0 = p0 I

  void validate() const;
  MotionModel model() const;
};

struct TrackerConfig {
  std::string name = "phyot";
  FusionMode mode = FusionMode::PhyOT;
  KalmanParams kalman;
  FlowParams flow;
  TurnConstraint turn;
  /// Box inflation for both the flow window and the template search region.
  double search_inflation = 2.0;
  double ncc_min_score = 0.5;
  /// Chi-square gate on the position innovation (2 dof); readings beyond it
  /// are treated as missing. 0 disables gating.
  double gate = 0.0;
  /// After this many consecutive gated readings the next one is accepted
  /// regardless, so a diverged filter can re-acquire. 0 never forces.
  int gate_patience = 0;
  PositionSource position_source = PositionSource::Synthetic;
  MotionSource motion_source = MotionSource::Flow;

  void validate() const;
};

struct TrajectoryPoint {
  int frame_index = 0;
  /// Reported box; empty when the tracker has lost the target.
  std::optional<BoundingBox> box;
  StateEstimate estimate;
  /// Position sensor reading at this frame (clamped to the frame).
  std::optional<BoundingBox> observation;
  /// The reading failed the innovation gate and was not fused.
  bool gated = false;
  Acceleration accel;
  std::optional<Velocity2> flow_velocity;

  bool observed() const { return observation.has_value() && !gated; }
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;

  std::size_t size() const { return points.size(); }
  std::vector<std::optional<BoundingBox>> boxes() const;
};

/// Position "sensor" slot: a detector, template matcher or replayed stream.
class PositionSensor {
public:
  virtual ~PositionSensor() = default;
  virtual void initialize(const GrayImage& /*first_frame*/, const BoundingBox& /*init*/) {}
  virtual std::optional<BoundingBox> observe(const GrayImage& frame, int frame_index,
                                             const BoundingBox& prior) = 0;
};

struct MotionReading {
  std::optional<Velocity2> velocity;
  Acceleration accel;
};

/// Velocity/acceleration "sensor" slot.
class MotionSensor {
public:
  virtual ~MotionSensor() = default;
  virtual void initialize(const GrayImage& /*first_frame*/, const BoundingBox& /*init*/) {}
  /// `previous` is the posterior at frame_index - 1, `previous_box` its box.
  virtual MotionReading sense(const GrayImage& frame, int frame_index,
                              const StateEstimate& previous, const BoundingBox& previous_box) = 0;
};

class NccPositionSensor final : public PositionSensor {
public:
  NccPositionSensor(double search_inflation, double min_score);
  void initialize(const GrayImage& first_frame, const BoundingBox& init) override;
  std::optional<BoundingBox> observe(const GrayImage& frame, int frame_index,
                                     const BoundingBox& prior) override;

private:
  double search_inflation_;
  double min_score_;
  GrayImage template_;
};

/// Replays a pre-computed per-frame stream; frames past the end are silent.
class ReplayPositionSensor final : public PositionSensor {
public:
  explicit ReplayPositionSensor(std::vector<std::optional<BoundingBox>> stream);
  std::optional<BoundingBox> observe(const GrayImage& frame, int frame_index,
                                     const BoundingBox& prior) override;

private:
  std::vector<std::optional<BoundingBox>> stream_;
};

/// Flow-derived velocity and acceleration inside a window around the target.
///
/// Flow is computed on the previous posterior box inflated by
/// `search_inflation`. The velocity reading is the masked mean of the flow
/// (t-1 -> t) plus the acceleration estimate, which moves the displacement
/// measured over the last frame interval forward to the state's velocity at t.
/// On the first frame no prior velocity exists, so the mask is the target box.
class FlowMotionSensor final : public MotionSensor {
public:
  FlowMotionSensor(FlowParams flow, TurnConstraint turn, double search_inflation,
                   std::shared_ptr<const AccelerationEstimator> estimator = nullptr);
  void initialize(const GrayImage& first_frame, const BoundingBox& init) override;
  MotionReading sense(const GrayImage& frame, int frame_index, const StateEstimate& previous,
                      const BoundingBox& previous_box) override;

private:
  FlowParams flow_;
  TurnConstraint turn_;
  double search_inflation_;
  std::shared_ptr<const AccelerationEstimator> estimator_;
  std::optional<GrayImage> before_previous_;
  std::optional<GrayImage> previous_;
  bool bootstrapped_ = false;
};

/// Replays known velocities/accelerations; index t holds v_t and a_{t-1}.
class ReplayMotionSensor final : public MotionSensor {
public:
  ReplayMotionSensor(std::vector<std::optional<Velocity2>> velocities,
                     std::vector<Acceleration> accels);
  MotionReading sense(const GrayImage& frame, int frame_index, const StateEstimate& previous,
                      const BoundingBox& previous_box) override;

private:
  std::vector<std::optional<Velocity2>> velocities_;
  std::vector<Acceleration> accels_;
};

/// Full-state observation: box center plus flow velocity, falling back to the
/// prior velocity when flow is silent. No box, no observation.
std::optional<StateVector> observe_full_state(const std::optional<BoundingBox>& box,
                                              const std::optional<Velocity2>& vel,
                                              const StateEstimate& prior);

/// Runs one tracker over a sequence. `motion` may be null unless the mode is PhyOT.
Trajectory track_sequence(std::span<const GrayImage> frames, const BoundingBox& init,
                          const TrackerConfig& config, PositionSensor& position,
                          MotionSensor* motion);

/// Same, with an NCC position sensor and a flow motion sensor built from `config`.
Trajectory track_sequence(std::span<const GrayImage> frames, const BoundingBox& init,
                          const TrackerConfig& config);

}  // namespace phyot
