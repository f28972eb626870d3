#pragma once

#include <cmath>
#include <string>

namespace phyot {

/// Axis-aligned box by center and extent. Pixel i spans [i, i + 1), so a box
/// covers [cx - w/2, cx + w/2) x [cy - h/2, cy + h/2).
struct BoundingBox {
  double cx = 0.0;
  double cy = 0.0;
  double w = 1.0;
  double h = 1.0;

  double left() const { return cx - 0.5 * w; }
  double top() const { return cy - 0.5 * h; }
  double right() const { return cx + 0.5 * w; }
  double bottom() const { return cy + 0.5 * h; }
  double area() const { return w * h; }

  bool valid() const {
    return std::isfinite(cx) && std::isfinite(cy) && std::isfinite(w) && std::isfinite(h) &&
           w > 0.0 && h > 0.0;
  }

  BoundingBox inflated(double factor) const { return {cx, cy, w * factor, h * factor}; }

  /// Box with the given top-left corner.
  static BoundingBox from_corner(double x, double y, double w, double h) {
    return {x + 0.5 * w, y + 0.5 * h, w, h};
  }

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

/// Parses "cx,cy,w,h".
BoundingBox parse_box(const std::string& text);

}  // namespace phyot
