#include "phyot/annotations.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "phyot/error.hpp"

namespace phyot {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

std::string format_number(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

BoundingBox parse_box(const std::string& text) {
  const auto fields = split(text, ',');
  BoundingBox box;
  if (fields.size() != 4 || !parse_number(fields[0], box.cx) || !parse_number(fields[1], box.cy) ||
      !parse_number(fields[2], box.w) || !parse_number(fields[3], box.h) || !box.valid()) {
    throw Error(ErrorCode::Parse, "expected a box as cx,cy,w,h with w,h > 0, got '" + text + "'");
  }
  return box;
}

std::vector<AnnotationRecord> parse_annotations(std::string_view text) {
  std::vector<AnnotationRecord> records;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto end = text.find('\n', start);
    const std::string_view raw =
        text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
    start = end == std::string_view::npos ? text.size() + 1 : end + 1;
    ++line_no;

    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;

    const auto fields = split(line, ',');
    AnnotationRecord rec;
    if (!parse_number(fields[0], rec.frame_index) || rec.frame_index < 0) {
      throw ParseError(ErrorCode::Parse, line_no, "bad frame index '" + std::string(fields[0]) + "'");
    }
    if (fields.size() == 2 && fields[1] == "-") {
      // absent
    } else if (fields.size() == 5) {
      BoundingBox b;
      if (!parse_number(fields[1], b.cx) || !parse_number(fields[2], b.cy) ||
          !parse_number(fields[3], b.w) || !parse_number(fields[4], b.h)) {
        throw ParseError(ErrorCode::Parse, line_no, "malformed number");
      }
      if (!b.valid()) throw ParseError(ErrorCode::Parse, line_no, "box needs finite values, w,h > 0");
      rec.box = b;
    } else {
      throw ParseError(ErrorCode::Parse, line_no, "expected 'frame,cx,cy,w,h' or 'frame,-'");
    }

    if (!records.empty()) {
      if (rec.frame_index == records.back().frame_index) {
        throw ParseError(ErrorCode::DuplicateFrame, line_no,
                         "duplicate frame " + std::to_string(rec.frame_index));
      }
      if (rec.frame_index < records.back().frame_index) {
        throw ParseError(ErrorCode::Ordering, line_no,
                         "frame " + std::to_string(rec.frame_index) + " out of order");
      }
    }
    records.push_back(rec);
  }
  return records;
}

std::vector<AnnotationRecord> load_annotations(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_annotations(ss.str());
}

std::string serialize_annotations(std::span<const AnnotationRecord> records) {
  std::string out;
  for (const auto& r : records) {
    out += std::to_string(r.frame_index);
    if (r.box) {
      for (double v : {r.box->cx, r.box->cy, r.box->w, r.box->h}) {
        out += ',';
        out += format_number(v);
      }
    } else {
      out += ",-";
    }
    out += '\n';
  }
  return out;
}

std::vector<AnnotationRecord> to_annotations(std::span<const std::optional<BoundingBox>> boxes) {
  std::vector<AnnotationRecord> out;
  for (std::size_t i = 0; i < boxes.size(); ++i) out.push_back({static_cast<int>(i), boxes[i]});
  return out;
}

std::vector<AnnotationRecord> to_annotations(std::span<const BoundingBox> boxes) {
  std::vector<AnnotationRecord> out;
  for (std::size_t i = 0; i < boxes.size(); ++i) out.push_back({static_cast<int>(i), boxes[i]});
  return out;
}

std::vector<std::optional<BoundingBox>> to_stream(std::span<const AnnotationRecord> records,
                                                  std::size_t frames) {
  std::vector<std::optional<BoundingBox>> out(frames);
  for (const auto& r : records) {
    if (static_cast<std::size_t>(r.frame_index) < frames) out[static_cast<std::size_t>(r.frame_index)] = r.box;
  }
  return out;
}

void write_state_trace(std::ostream& out, const Trajectory& trajectory) {
  out << "frame,cx,cy,w,h,px,py,vx,vy,ax,ay,observed";
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) out << ",c" << i << j;
  }
  out << '\n';
  for (const auto& p : trajectory.points) {
    out << p.frame_index;
    if (p.box) {
      for (double v : {p.box->cx, p.box->cy, p.box->w, p.box->h}) out << ',' << format_number(v);
    } else {
      out << ",-,-,-,-";
    }
    const auto& s = p.estimate.state;
    for (double v : {s.px, s.py, s.vx, s.vy, p.accel.ax, p.accel.ay}) out << ',' << format_number(v);
    out << ',' << (p.observed() ? 1 : 0);
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) out << ',' << format_number(p.estimate.cov(i, j));
    }
    out << '\n';
  }
}

}  // namespace phyot
