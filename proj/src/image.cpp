#include "phyot/image.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "phyot/error.hpp"
#include "phyot/flow_analysis.hpp"

namespace phyot {

Grid::Grid(int width, int height, double fill) {
  if (width < 0 || height < 0) {
    throw Error(ErrorCode::InvalidInput, "grid dimensions must be non-negative");
  }
  width_ = width;
  height_ = height;
  values_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill);
}

Grid::Grid(int width, int height, std::vector<double> values) : Grid() {
  if (width < 0 || height < 0 ||
      values.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorCode::InvalidInput, "grid value count does not match dimensions");
  }
  width_ = width;
  height_ = height;
  values_ = std::move(values);
}

double Grid::clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return (*this)(x, y);
}

double Grid::bilinear(double x, double y) const {
  x = std::clamp(x, 0.0, static_cast<double>(width_ - 1));
  y = std::clamp(y, 0.0, static_cast<double>(height_ - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, width_ - 1);
  const int y1 = std::min(y0 + 1, height_ - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const double top = (1.0 - fx) * (*this)(x0, y0) + fx * (*this)(x1, y0);
  const double bottom = (1.0 - fx) * (*this)(x0, y1) + fx * (*this)(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

bool Grid::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

GrayImage::GrayImage(int width, int height, double fill) : GrayImage(Grid(width, height, fill)) {}

GrayImage::GrayImage(Grid pixels) : pixels_(std::move(pixels)) {
  for (double v : pixels_.values()) {
    if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
      throw Error(ErrorCode::InvalidInput, "image intensities must be finite and within [0, 1]");
    }
  }
}

void GrayImage::set(int x, int y, double value) {
  if (!std::isfinite(value) || value < 0.0 || value > 1.0) {
    throw Error(ErrorCode::InvalidInput, "image intensities must be finite and within [0, 1]");
  }
  pixels_(x, y) = value;
}

GrayImage GrayImage::crop(int x0, int y0, int width, int height) const {
  Grid out(width, height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      out(x, y) = pixels_.clamped(x0 + x, y0 + y);
    }
  }
  GrayImage img;
  img.pixels_ = std::move(out);
  return img;
}

FlowField::FlowField(Grid u_, Grid v_) : u(std::move(u_)), v(std::move(v_)) {
  if (!u.same_shape(v)) {
    throw Error(ErrorCode::InvalidInput, "flow components differ in shape");
  }
}

namespace {

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

class HeaderReader {
public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  long next_int() {
    skip_space_and_comments();
    long value = 0;
    bool any = false;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + (bytes_[pos_] - '0');
      if (value > 1'000'000) throw Error(ErrorCode::Parse, "PNM header value too large");
      ++pos_;
      any = true;
    }
    if (!any) throw Error(ErrorCode::Parse, "malformed PNM header");
    return value;
  }

  /// Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_offset() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorCode::Parse, "malformed PNM header");
    }
    return pos_ + 1;
  }

private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> bytes, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(bytes[at + i]) << (8 * i);
  return v;
}

}  // namespace

GrayImage decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6')) {
    throw Error(ErrorCode::Parse, "expected binary PGM (P5) or PPM (P6)");
  }
  const bool color = bytes[1] == '6';
  HeaderReader header(bytes);
  const long width = header.next_int();
  const long height = header.next_int();
  const long maxval = header.next_int();
  if (width <= 0 || height <= 0) throw Error(ErrorCode::Parse, "PNM dimensions must be positive");
  if (maxval <= 0 || maxval > 255) throw Error(ErrorCode::Parse, "only 8-bit PNM is supported");
  const std::size_t offset = header.raster_offset();
  const std::size_t channels = color ? 3 : 1;
  const std::size_t count = static_cast<std::size_t>(width * height);
  if (bytes.size() < offset + count * channels) {
    throw Error(ErrorCode::Parse, "truncated PNM raster");
  }

  std::vector<double> values(count);
  const double scale = 1.0 / static_cast<double>(maxval);
  for (std::size_t i = 0; i < count; ++i) {
    double sum = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      sum += std::min<double>(bytes[offset + i * channels + c], maxval);
    }
    values[i] = sum / static_cast<double>(channels) * scale;
  }
  return GrayImage(Grid(static_cast<int>(width), static_cast<int>(height), std::move(values)));
}

GrayImage read_pgm(const std::filesystem::path& path) { return decode_pnm(read_bytes(path)); }

std::vector<std::uint8_t> encode_pgm(const GrayImage& image) {
  const std::string header = "P5\n" + std::to_string(image.width()) + " " +
                             std::to_string(image.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  for (double v : image.pixels().values()) {
    out.push_back(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  write_bytes(path, encode_pgm(image));
}

std::vector<std::uint8_t> encode_pbm(const AttentionMask& mask) {
  const std::string header =
      "P4\n" + std::to_string(mask.width) + " " + std::to_string(mask.height) + "\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  const int row_bytes = (mask.width + 7) / 8;
  for (int y = 0; y < mask.height; ++y) {
    for (int b = 0; b < row_bytes; ++b) {
      std::uint8_t byte = 0;
      for (int bit = 0; bit < 8; ++bit) {
        const int x = b * 8 + bit;
        if (x < mask.width && mask(x, y)) byte |= static_cast<std::uint8_t>(0x80 >> bit);
      }
      out.push_back(byte);
    }
  }
  return out;
}

void write_pbm(const std::filesystem::path& path, const AttentionMask& mask) {
  write_bytes(path, encode_pbm(mask));
}

std::vector<std::uint8_t> encode_flow(const FlowField& flow) {
  std::vector<std::uint8_t> out = {'P', 'H', 'O', 'F'};
  put_u32(out, static_cast<std::uint32_t>(flow.width()));
  put_u32(out, static_cast<std::uint32_t>(flow.height()));
  out.reserve(out.size() + flow.u.size() * 8);
  for (std::size_t i = 0; i < flow.u.size(); ++i) {
    for (double c : {flow.u.values()[i], flow.v.values()[i]}) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(c)));
    }
  }
  return out;
}

FlowField decode_flow(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "PHOF", 4) != 0) {
    throw Error(ErrorCode::Parse, "missing PHOF magic");
  }
  const std::uint32_t width = get_u32(bytes, 4);
  const std::uint32_t height = get_u32(bytes, 8);
  if (width > (1u << 15) || height > (1u << 15)) {
    throw Error(ErrorCode::Parse, "flow dimensions too large");
  }
  const std::size_t count = static_cast<std::size_t>(width) * height;
  if (bytes.size() != 12 + count * 8) throw Error(ErrorCode::Parse, "flow payload size mismatch");

  FlowField flow(static_cast<int>(width), static_cast<int>(height));
  for (std::size_t i = 0; i < count; ++i) {
    flow.u.values()[i] = std::bit_cast<float>(get_u32(bytes, 12 + i * 8));
    flow.v.values()[i] = std::bit_cast<float>(get_u32(bytes, 16 + i * 8));
  }
  return flow;
}

void write_flow(const std::filesystem::path& path, const FlowField& flow) {
  write_bytes(path, encode_flow(flow));
}

FlowField read_flow(const std::filesystem::path& path) { return decode_flow(read_bytes(path)); }

}  // namespace phyot
