#include "phyot/optical_flow.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "phyot/error.hpp"

namespace phyot {

namespace {

constexpr int kMinFlowSize = 8;
constexpr double kIntensityScale = 255.0;

void require_same_shape(const Grid& a, const Grid& b, const char* what) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::InvalidInput, std::string(what) + ": dimension mismatch");
  }
}

// One-sided on the border, central elsewhere. Single-pixel extents have no gradient.
double dx(const Grid& g, int x, int y) {
  const int w = g.width();
  if (w < 2) return 0.0;
  if (x == 0) return g(1, y) - g(0, y);
  if (x == w - 1) return g(w - 1, y) - g(w - 2, y);
  return 0.5 * (g(x + 1, y) - g(x - 1, y));
}

double dy(const Grid& g, int x, int y) {
  const int h = g.height();
  if (h < 2) return 0.0;
  if (y == 0) return g(x, 1) - g(x, 0);
  if (y == h - 1) return g(x, h - 1) - g(x, h - 2);
  return 0.5 * (g(x, y + 1) - g(x, y - 1));
}

ImageGradients gradients(const Grid& a, const Grid& b) {
  const int w = a.width();
  const int h = a.height();
  ImageGradients g{Grid(w, h), Grid(w, h), Grid(w, h)};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      g.ix(x, y) = 0.5 * (dx(a, x, y) + dx(b, x, y));
      g.iy(x, y) = 0.5 * (dy(a, x, y) + dy(b, x, y));
      g.it(x, y) = b(x, y) - a(x, y);
    }
  }
  return g;
}

// Horn-Schunck neighbourhood average with edge-clamped borders.
void local_average(const std::vector<double>& in, std::vector<double>& out, int w, int h) {
  for (int y = 0; y < h; ++y) {
    const double* up = in.data() + static_cast<std::size_t>(std::max(y - 1, 0)) * w;
    const double* mid = in.data() + static_cast<std::size_t>(y) * w;
    const double* down = in.data() + static_cast<std::size_t>(std::min(y + 1, h - 1)) * w;
    double* dst = out.data() + static_cast<std::size_t>(y) * w;
    for (int x = 0; x < w; ++x) {
      const int l = std::max(x - 1, 0);
      const int r = std::min(x + 1, w - 1);
      dst[x] = (mid[l] + mid[r] + up[x] + down[x]) / 6.0 +
               (up[l] + up[r] + down[l] + down[r]) / 12.0;
    }
  }
}

}  // namespace

void FlowParams::validate() const {
  if (!(smoothness_weight > 0.0) || !std::isfinite(smoothness_weight)) {
    throw Error(ErrorCode::InvalidInput, "flow smoothness_weight must be > 0");
  }
  if (max_iterations < 1) throw Error(ErrorCode::InvalidInput, "flow max_iterations must be >= 1");
  if (!(convergence_eps > 0.0)) {
    throw Error(ErrorCode::InvalidInput, "flow convergence_eps must be > 0");
  }
  if (warps < 1) throw Error(ErrorCode::InvalidInput, "flow warps must be >= 1");
}

ImageGradients image_gradients(const GrayImage& a, const GrayImage& b) {
  require_same_shape(a.pixels(), b.pixels(), "image_gradients");
  return gradients(a.pixels(), b.pixels());
}

FlowField estimate_flow(const GrayImage& a, const GrayImage& b, const FlowParams& params) {
  require_same_shape(a.pixels(), b.pixels(), "estimate_flow");
  if (a.width() < kMinFlowSize || a.height() < kMinFlowSize) {
    throw Error(ErrorCode::InvalidInput, "estimate_flow: images must be at least 8x8");
  }
  params.validate();

  const int w = a.width();
  const int h = a.height();
  const std::size_t n = static_cast<std::size_t>(w) * h;
  const double alpha2 = params.smoothness_weight;

  FlowField flow(w, h);
  std::vector<double> u(n, 0.0), v(n, 0.0), ubar(n), vbar(n);
  std::vector<double> ix(n), iy(n), it0(n), denom(n);

  for (int warp = 0; warp < params.warps; ++warp) {
    // Linearize b(x + u0 + du) around the current estimate u0.
    const Grid warped = warp == 0 ? b.pixels() : warp_grid(b.pixels(), flow);
    const ImageGradients g = gradients(a.pixels(), warped);
    for (std::size_t i = 0; i < n; ++i) {
      ix[i] = g.ix.values()[i] * kIntensityScale;
      iy[i] = g.iy.values()[i] * kIntensityScale;
      it0[i] = g.it.values()[i] * kIntensityScale - ix[i] * u[i] - iy[i] * v[i];
      denom[i] = alpha2 + ix[i] * ix[i] + iy[i] * iy[i];
    }

    for (int iter = 0; iter < params.max_iterations; ++iter) {
      local_average(u, ubar, w, h);
      local_average(v, vbar, w, h);
      double change = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double t = (ix[i] * ubar[i] + iy[i] * vbar[i] + it0[i]) / denom[i];
        const double nu = ubar[i] - ix[i] * t;
        const double nv = vbar[i] - iy[i] * t;
        change += std::abs(nu - u[i]) + std::abs(nv - v[i]);
        u[i] = nu;
        v[i] = nv;
      }
      if (change / (2.0 * static_cast<double>(n)) < params.convergence_eps) break;
    }

    std::copy(u.begin(), u.end(), flow.u.values().begin());
    std::copy(v.begin(), v.end(), flow.v.values().begin());
  }
  return flow;
}

Grid warp_grid(const Grid& grid, const FlowField& flow) {
  require_same_shape(grid, flow.u, "warp");
  Grid out(grid.width(), grid.height());
  for (int y = 0; y < grid.height(); ++y) {
    for (int x = 0; x < grid.width(); ++x) {
      out(x, y) = grid.bilinear(x + flow.u(x, y), y + flow.v(x, y));
    }
  }
  return out;
}

FlowField warp_field(const FlowField& field, const FlowField& flow) {
  require_same_shape(field.u, flow.u, "warp_field");
  return FlowField(warp_grid(field.u, flow), warp_grid(field.v, flow));
}

GrayImage warp_image(const GrayImage& image, const FlowField& flow) {
  return GrayImage(warp_grid(image.pixels(), flow));
}

}  // namespace phyot
