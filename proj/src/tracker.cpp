#include "phyot/tracker.hpp"

#include <algorithm>
#include <cmath>

#include "phyot/error.hpp"
#include "phyot/ncc.hpp"

namespace phyot {

const char* to_string(FusionMode mode) {
  switch (mode) {
    case FusionMode::Raw: return "raw";
    case FusionMode::Hold: return "hold";
    case FusionMode::ConstantVelocity: return "cv";
    case FusionMode::PhyOT: return "phyot";
  }
  return "unknown";
}

FusionMode parse_fusion_mode(const std::string& text) {
  if (text == "raw") return FusionMode::Raw;
  if (text == "hold") return FusionMode::Hold;
  if (text == "cv" || text == "constant-velocity") return FusionMode::ConstantVelocity;
  if (text == "phyot" || text == "fused") return FusionMode::PhyOT;
  throw Error(ErrorCode::InvalidInput, "unknown tracker mode '" + text + "'");
}

void KalmanParams::validate() const {
  for (double v : {process_noise, position_noise, velocity_noise, initial_cov}) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw Error(ErrorCode::InvalidInput, "kalman noise parameters must be finite and >= 0");
    }
  }
}

MotionModel KalmanParams::model() const {
  const Matrix4 q = process_noise * Matrix4::Identity();
  const Matrix4 r = Vector4(position_noise, position_noise, velocity_noise, velocity_noise).asDiagonal();
  return MotionModel(q, r);
}

void TrackerConfig::validate() const {
  kalman.validate();
  flow.validate();
  turn.validate();
  if (!(search_inflation >= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "search_inflation must be >= 1");
  }
  if (!(gate >= 0.0) || !std::isfinite(gate)) throw Error(ErrorCode::InvalidInput, "gate must be >= 0");
  if (gate_patience < 0) throw Error(ErrorCode::InvalidInput, "gate_patience must be >= 0");
  if (!(ncc_min_score >= -1.0 && ncc_min_score <= 1.0)) {
    throw Error(ErrorCode::InvalidInput, "ncc_min_score must be within [-1, 1]");
  }
}

std::vector<std::optional<BoundingBox>> Trajectory::boxes() const {
  std::vector<std::optional<BoundingBox>> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(p.box);
  return out;
}

NccPositionSensor::NccPositionSensor(double search_inflation, double min_score)
    : search_inflation_(search_inflation), min_score_(min_score) {}

void NccPositionSensor::initialize(const GrayImage& first_frame, const BoundingBox& init) {
  template_ = extract_patch(first_frame, init);
}

std::optional<BoundingBox> NccPositionSensor::observe(const GrayImage& frame, int /*frame_index*/,
                                                      const BoundingBox& prior) {
  BoundingBox search = prior.inflated(search_inflation_);
  search.w = std::max(search.w, template_.width() + 1.0);
  search.h = std::max(search.h, template_.height() + 1.0);
  try {
    const TemplateMatch match = ncc_template_match(frame, template_, search);
    if (match.score < min_score_) return std::nullopt;
    return match.box;
  } catch (const Error& e) {
    // Search window pushed off-frame: no reading this frame.
    if (e.code() == ErrorCode::InvalidInput) return std::nullopt;
    throw;
  }
}

ReplayPositionSensor::ReplayPositionSensor(std::vector<std::optional<BoundingBox>> stream)
    : stream_(std::move(stream)) {}

std::optional<BoundingBox> ReplayPositionSensor::observe(const GrayImage& /*frame*/,
                                                         int frame_index,
                                                         const BoundingBox& /*prior*/) {
  if (frame_index < 0 || static_cast<std::size_t>(frame_index) >= stream_.size()) {
    return std::nullopt;
  }
  return stream_[static_cast<std::size_t>(frame_index)];
}

FlowMotionSensor::FlowMotionSensor(FlowParams flow, TurnConstraint turn, double search_inflation,
                                   std::shared_ptr<const AccelerationEstimator> estimator)
    : flow_(flow),
      turn_(turn),
      search_inflation_(search_inflation),
      estimator_(estimator ? std::move(estimator)
                           : std::make_shared<MaskedMeanAccelerationEstimator>()) {
  flow_.validate();
  turn_.validate();
}

void FlowMotionSensor::initialize(const GrayImage& first_frame, const BoundingBox& /*init*/) {
  before_previous_.reset();
  previous_ = first_frame;
  bootstrapped_ = false;
}

MotionReading FlowMotionSensor::sense(const GrayImage& frame, int /*frame_index*/,
                                      const StateEstimate& previous,
                                      const BoundingBox& previous_box) {
  if (!previous_) throw Error(ErrorCode::InvalidInput, "flow sensor used before initialize");

  const int w = std::max(8, static_cast<int>(std::lround(previous_box.w * search_inflation_)));
  const int h = std::max(8, static_cast<int>(std::lround(previous_box.h * search_inflation_)));
  const int x0 = static_cast<int>(std::lround(previous.state.px - 0.5 * w));
  const int y0 = static_cast<int>(std::lround(previous.state.py - 0.5 * h));

  const GrayImage prev_crop = previous_->crop(x0, y0, w, h);
  const FlowField current = estimate_flow(prev_crop, frame.crop(x0, y0, w, h), flow_);
  const Velocity2 prior{previous.state.vx, previous.state.vy};

  MotionReading reading;
  if (!bootstrapped_) {
    const AttentionMask box_mask = rectangle_mask(
        w, h, static_cast<int>(std::lround(previous_box.left())) - x0,
        static_cast<int>(std::lround(previous_box.top())) - y0,
        static_cast<int>(std::lround(previous_box.right())) - x0,
        static_cast<int>(std::lround(previous_box.bottom())) - y0);
    reading.velocity = velocity_from_flow(current, box_mask);
    bootstrapped_ = true;
  } else {
    reading.velocity = velocity_from_flow(current, attention_mask(current, prior, turn_));
    if (before_previous_) {
      const FlowField earlier = estimate_flow(before_previous_->crop(x0, y0, w, h), prev_crop, flow_);
      reading.accel = estimator_->estimate(earlier, current, attention_mask(earlier, prior, turn_));
    }
  }
  if (reading.velocity) {
    reading.velocity->vx += reading.accel.ax;
    reading.velocity->vy += reading.accel.ay;
  }

  before_previous_ = std::move(previous_);
  previous_ = frame;
  return reading;
}

ReplayMotionSensor::ReplayMotionSensor(std::vector<std::optional<Velocity2>> velocities,
                                       std::vector<Acceleration> accels)
    : velocities_(std::move(velocities)), accels_(std::move(accels)) {}

MotionReading ReplayMotionSensor::sense(const GrayImage& /*frame*/, int frame_index,
                                        const StateEstimate& /*previous*/,
                                        const BoundingBox& /*previous_box*/) {
  MotionReading reading;
  const auto t = static_cast<std::size_t>(frame_index);
  if (frame_index >= 0 && t < velocities_.size()) reading.velocity = velocities_[t];
  if (frame_index >= 0 && t < accels_.size()) reading.accel = accels_[t];
  return reading;
}

std::optional<StateVector> observe_full_state(const std::optional<BoundingBox>& box,
                                              const std::optional<Velocity2>& vel,
                                              const StateEstimate& prior) {
  if (!box) return std::nullopt;
  if (vel) return StateVector{box->cx, box->cy, vel->vx, vel->vy};
  return StateVector{box->cx, box->cy, prior.state.vx, prior.state.vy};
}

namespace {

BoundingBox clamp_to_frame(BoundingBox box, const GrayImage& frame) {
  box.cx = std::clamp(box.cx, 0.0, static_cast<double>(frame.width()));
  box.cy = std::clamp(box.cy, 0.0, static_cast<double>(frame.height()));
  return box;
}

/// Squared Mahalanobis distance of the position innovation under P + R.
std::optional<double> position_innovation(const StateEstimate& prior, const BoundingBox& obs,
                                          const MotionModel& model) {
  const Eigen::Matrix2d s = prior.cov.topLeftCorner<2, 2>() + model.R.topLeftCorner<2, 2>();
  const Eigen::Vector2d r(obs.cx - prior.state.px, obs.cy - prior.state.py);
  Eigen::LDLT<Eigen::Matrix2d> ldlt(s);
  if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0)) return std::nullopt;
  return r.dot(ldlt.solve(r));
}

StateEstimate pinned_estimate(const BoundingBox& box, int frame_index) {
  return {StateVector{box.cx, box.cy, 0.0, 0.0}, Matrix4::Zero(), frame_index};
}

}  // namespace

Trajectory track_sequence(std::span<const GrayImage> frames, const BoundingBox& init,
                          const TrackerConfig& config, PositionSensor& position,
                          MotionSensor* motion) {
  config.validate();
  if (frames.size() < 2) throw Error(ErrorCode::InvalidInput, "track_sequence: need >= 2 frames");
  if (!init.valid() || init.cx < 0.0 || init.cy < 0.0 || init.cx > frames[0].width() ||
      init.cy > frames[0].height()) {
    throw Error(ErrorCode::InvalidInput, "track_sequence: init box outside frame 0");
  }
  for (const auto& f : frames) {
    if (f.width() != frames[0].width() || f.height() != frames[0].height()) {
      throw Error(ErrorCode::InvalidInput, "track_sequence: frames differ in size");
    }
  }
  const bool fused = config.mode == FusionMode::ConstantVelocity || config.mode == FusionMode::PhyOT;
  if (config.mode == FusionMode::PhyOT && motion == nullptr) {
    throw Error(ErrorCode::InvalidInput, "track_sequence: phyot mode needs a motion sensor");
  }

  const MotionModel model = config.kalman.model();
  Trajectory traj;
  traj.points.reserve(frames.size());

  StateEstimate estimate = pinned_estimate(init, 0);
  if (fused) estimate.cov = config.kalman.initial_cov * Matrix4::Identity();
  BoundingBox last_box = init;
  int consecutive_gated = 0;
  double extent_w = init.w, extent_h = init.h;
  traj.points.push_back({0, init, estimate, init, {}, {}});

  position.initialize(frames[0], init);
  if (motion && config.mode == FusionMode::PhyOT) motion->initialize(frames[0], init);

  for (std::size_t t = 1; t < frames.size(); ++t) {
    const int index = static_cast<int>(t);
    const GrayImage& frame = frames[t];
    TrajectoryPoint point;
    point.frame_index = index;

    if (!fused) {
      std::optional<BoundingBox> obs = position.observe(frame, index, last_box);
      if (obs) obs = clamp_to_frame(*obs, frame);
      point.observation = obs;
      if (obs) last_box = *obs;
      if (obs || config.mode == FusionMode::Hold) point.box = last_box;
      point.estimate = pinned_estimate(last_box, index);
      traj.points.push_back(point);
      continue;
    }

    MotionReading reading;
    if (config.mode == FusionMode::PhyOT) {
      reading = motion->sense(frame, index, estimate, last_box);
    }
    const StateEstimate prior = predict(estimate, reading.accel, model);
    const BoundingBox prior_box{prior.state.px, prior.state.py, extent_w, extent_h};

    std::optional<BoundingBox> obs = position.observe(frame, index, prior_box);
    if (obs) obs = clamp_to_frame(*obs, frame);
    point.observation = obs;
    if (obs && config.gate > 0.0) {
      const auto d2 = position_innovation(prior, *obs, model);
      const bool forced = config.gate_patience > 0 && consecutive_gated >= config.gate_patience;
      point.gated = d2 && *d2 > config.gate && !forced;
      consecutive_gated = point.gated ? consecutive_gated + 1 : 0;
    }
    const std::optional<BoundingBox> fused_obs = point.gated ? std::nullopt : obs;
    if (fused_obs) {
      extent_w = fused_obs->w;
      extent_h = fused_obs->h;
    }
    const auto z = observe_full_state(fused_obs, reading.velocity, prior);
    estimate = z ? update(prior, *z, model) : prior;
    last_box = {estimate.state.px, estimate.state.py, extent_w, extent_h};

    point.box = last_box;
    point.estimate = estimate;
    point.accel = reading.accel;
    point.flow_velocity = reading.velocity;
    traj.points.push_back(point);
  }
  return traj;
}

Trajectory track_sequence(std::span<const GrayImage> frames, const BoundingBox& init,
                          const TrackerConfig& config) {
  NccPositionSensor position(config.search_inflation, config.ncc_min_score);
  FlowMotionSensor motion(config.flow, config.turn, config.search_inflation);
  return track_sequence(frames, init, config, position, &motion);
}

}  // namespace phyot
