#include "phyot/flow_analysis.hpp"

#include <algorithm>
#include <cmath>

#include "phyot/error.hpp"
#include "phyot/optical_flow.hpp"

namespace phyot {

namespace {

void require_mask_shape(const FlowField& flow, const AttentionMask& mask, const char* what) {
  if (mask.width != flow.width() || mask.height != flow.height() ||
      mask.bits.size() != flow.u.size()) {
    throw Error(ErrorCode::InvalidInput, std::string(what) + ": mask/flow dimension mismatch");
  }
}

}  // namespace

double Velocity2::norm() const { return std::hypot(vx, vy); }

std::size_t AttentionMask::count() const {
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), true));
}

void TurnConstraint::validate() const {
  if (!(angle_fraction > 0.0) || !std::isfinite(angle_fraction)) {
    throw Error(ErrorCode::InvalidInput, "turn constraint angle_fraction must be > 0");
  }
  if (!(floor >= 0.0) || !std::isfinite(floor)) {
    throw Error(ErrorCode::InvalidInput, "turn constraint floor must be >= 0");
  }
}

double TurnConstraint::threshold(const Velocity2& prior) const {
  return std::max(prior.norm() * angle_fraction, floor);
}

AttentionMask attention_mask(const FlowField& flow, const Velocity2& prior_vel,
                             const TurnConstraint& constraint) {
  constraint.validate();
  if (!std::isfinite(prior_vel.vx) || !std::isfinite(prior_vel.vy)) {
    throw Error(ErrorCode::InvalidInput, "attention_mask: non-finite prior velocity");
  }
  if (!flow.u.same_shape(flow.v)) {
    throw Error(ErrorCode::InvalidInput, "attention_mask: flow components differ in shape");
  }
  const double limit = constraint.threshold(prior_vel);
  AttentionMask mask(flow.width(), flow.height());
  for (int y = 0; y < flow.height(); ++y) {
    for (int x = 0; x < flow.width(); ++x) {
      const double d = std::hypot(flow.u(x, y) - prior_vel.vx, flow.v(x, y) - prior_vel.vy);
      mask.set(x, y, d <= limit);
    }
  }
  return mask;
}

AttentionMask rectangle_mask(int width, int height, int x0, int y0, int x1, int y1) {
  AttentionMask mask(width, height);
  for (int y = std::max(y0, 0); y < std::min(y1, height); ++y) {
    for (int x = std::max(x0, 0); x < std::min(x1, width); ++x) mask.set(x, y, true);
  }
  return mask;
}

std::optional<Velocity2> velocity_from_flow(const FlowField& flow, const AttentionMask& mask) {
  require_mask_shape(flow, mask, "velocity_from_flow");
  double su = 0.0, sv = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    if (!mask.bits[i]) continue;
    su += flow.u.values()[i];
    sv += flow.v.values()[i];
    ++n;
  }
  if (n == 0) return std::nullopt;
  return Velocity2{su / static_cast<double>(n), sv / static_cast<double>(n)};
}

Acceleration estimate_acceleration(const FlowField& current, const FlowField& next,
                                   const AttentionMask& mask) {
  if (!current.same_shape(next)) {
    throw Error(ErrorCode::InvalidInput, "estimate_acceleration: flow dimension mismatch");
  }
  require_mask_shape(current, mask, "estimate_acceleration");

  const FlowField aligned = warp_field(next, current);
  double sx = 0.0, sy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.bits.size(); ++i) {
    if (!mask.bits[i]) continue;
    sx += aligned.u.values()[i] - current.u.values()[i];
    sy += aligned.v.values()[i] - current.v.values()[i];
    ++n;
  }
  if (n == 0) return {};
  return {sx / static_cast<double>(n), sy / static_cast<double>(n)};
}

}  // namespace phyot
