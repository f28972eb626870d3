#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace phyot {

/// Row-major scalar grid. Used for intensities, gradients and flow components.
class Grid {
public:
  Grid() = default;
  Grid(int width, int height, double fill = 0.0);
  Grid(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  double& operator()(int x, int y) { return values_[index(x, y)]; }
  double operator()(int x, int y) const { return values_[index(x, y)]; }

  /// Edge-clamped access.
  double clamped(int x, int y) const;
  /// Bilinear sample at a fractional position with edge-clamped coordinates.
  double bilinear(double x, double y) const;

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }

  bool same_shape(const Grid& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  bool all_finite() const;

  friend bool operator==(const Grid&, const Grid&) = default;

private:
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

/// Intensities in [0, 1].
class GrayImage {
public:
  GrayImage() = default;
  GrayImage(int width, int height, double fill = 0.0);
  /// Validates range and finiteness.
  explicit GrayImage(Grid pixels);

  int width() const { return pixels_.width(); }
  int height() const { return pixels_.height(); }
  double operator()(int x, int y) const { return pixels_(x, y); }
  void set(int x, int y, double value);

  const Grid& pixels() const { return pixels_; }

  /// Sub-image with edge-clamped sampling outside the frame.
  GrayImage crop(int x0, int y0, int width, int height) const;

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

private:
  Grid pixels_;
};

/// Dense per-pixel displacement (u, v) in pixels/frame.
struct FlowField {
  Grid u;
  Grid v;

  FlowField() = default;
  FlowField(int width, int height, double fu = 0.0, double fv = 0.0)
      : u(width, height, fu), v(width, height, fv) {}
  FlowField(Grid u_, Grid v_);

  int width() const { return u.width(); }
  int height() const { return u.height(); }
  bool same_shape(const FlowField& other) const { return u.same_shape(other.u); }

  friend bool operator==(const FlowField&, const FlowField&) = default;
};

struct AttentionMask;

// Netpbm and flow codecs.
GrayImage read_pgm(const std::filesystem::path& path);
GrayImage decode_pnm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pgm(const GrayImage& image);
void write_pgm(const std::filesystem::path& path, const GrayImage& image);

std::vector<std::uint8_t> encode_pbm(const AttentionMask& mask);
void write_pbm(const std::filesystem::path& path, const AttentionMask& mask);

/// "PHOF", u32 width, u32 height, then little-endian f32 (u, v) pairs row-major.
std::vector<std::uint8_t> encode_flow(const FlowField& flow);
FlowField decode_flow(std::span<const std::uint8_t> bytes);
void write_flow(const std::filesystem::path& path, const FlowField& flow);
FlowField read_flow(const std::filesystem::path& path);

}  // namespace phyot
