#pragma once

#include <numbers>
#include <optional>
#include <vector>

#include "phyot/image.hpp"
#include "phyot/kalman.hpp"

namespace phyot {

struct Velocity2 {
  double vx = 0.0;
  double vy = 0.0;

  double norm() const;
  friend bool operator==(const Velocity2&, const Velocity2&) = default;
};

/// Per-pixel selection of flow vectors belonging to the tracked object.
struct AttentionMask {
  int width = 0;
  int height = 0;
  std::vector<bool> bits;

  AttentionMask() = default;
  AttentionMask(int w, int h, bool fill = false)
      : width(w), height(h), bits(static_cast<std::size_t>(w) * h, fill) {}

  bool operator()(int x, int y) const { return bits[static_cast<std::size_t>(y) * width + x]; }
  void set(int x, int y, bool on) { bits[static_cast<std::size_t>(y) * width + x] = on; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }

  friend bool operator==(const AttentionMask&, const AttentionMask&) = default;
};

/// Bound on how far a pixel's flow may deviate from the prior velocity:
/// threshold(v) = max(|v| * angle_fraction, floor).
struct TurnConstraint {
  double angle_fraction = std::numbers::pi / 6.0;
  double floor = 0.5;

  void validate() const;
  double threshold(const Velocity2& prior) const;
};

/// bits(x, y) = |flow(x, y) - prior_vel| <= constraint.threshold(prior_vel).
AttentionMask attention_mask(const FlowField& flow, const Velocity2& prior_vel,
                             const TurnConstraint& constraint);

/// Mask covering the axis-aligned pixel rectangle [x0, x1) x [y0, y1), clipped.
AttentionMask rectangle_mask(int width, int height, int x0, int y0, int x1, int y1);

/// Mean flow over masked-in pixels; nullopt for an empty mask.
std::optional<Velocity2> velocity_from_flow(const FlowField& flow, const AttentionMask& mask);

/// Per-pixel a = warp_field(next, current) - current, averaged over the mask.
/// `current` is the flow t -> t+1 and `next` the flow t+1 -> t+2; the mask
/// lives on the `current` grid. Zero when the mask is empty.
Acceleration estimate_acceleration(const FlowField& current, const FlowField& next,
                                   const AttentionMask& mask);

/// Seam for acceleration regressors: the analytic estimator above is the
/// default, a learned estimator can take its place without touching the loop.
class AccelerationEstimator {
public:
  virtual ~AccelerationEstimator() = default;
  virtual Acceleration estimate(const FlowField& current, const FlowField& next,
                                const AttentionMask& mask) const = 0;
};

class MaskedMeanAccelerationEstimator final : public AccelerationEstimator {
public:
  Acceleration estimate(const FlowField& current, const FlowField& next,
                        const AttentionMask& mask) const override {
    return estimate_acceleration(current, next, mask);
  }
};

}  // namespace phyot
