#pragma once

#include "phyot/image.hpp"

namespace phyot {

/// Horn-Schunck settings.
///
/// `smoothness_weight` is alpha^2 with intensity gradients expressed on the
/// 8-bit scale (0..255), the scale the classical defaults were tuned for.
/// `warps` re-linearizes the brightness constraint around the current
/// estimate by backwarping the second frame; 1 is the classical method.
struct FlowParams {
  double smoothness_weight = 100.0;
  int max_iterations = 200;
  double convergence_eps = 1e-3;
  int warps = 3;

  void validate() const;
};

struct ImageGradients {
  Grid ix;
  Grid iy;
  Grid it;
};

/// Spatial central differences averaged over both frames (one-sided on the
/// border) and the temporal difference b - a. Units: intensity per pixel.
ImageGradients image_gradients(const GrayImage& a, const GrayImage& b);

/// Dense flow from `a` to `b`: a(x, y) ~ b(x + u, y + v).
FlowField estimate_flow(const GrayImage& a, const GrayImage& b, const FlowParams& params = {});

/// Backwarp: out(x, y) = field(x + flow.u(x, y), y + flow.v(x, y)), bilinear, edge-clamped.
FlowField warp_field(const FlowField& field, const FlowField& flow);
Grid warp_grid(const Grid& grid, const FlowField& flow);
GrayImage warp_image(const GrayImage& image, const FlowField& flow);

}  // namespace phyot
