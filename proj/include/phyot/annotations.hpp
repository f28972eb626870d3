#pragma once

#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "phyot/geometry.hpp"
#include "phyot/tracker.hpp"

namespace phyot {

/// One line of `frame,cx,cy,w,h` (present) or `frame,-` (absent).
struct AnnotationRecord {
  int frame_index = 0;
  std::optional<BoundingBox> box;

  bool present() const { return box.has_value(); }
  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

/// `#` starts a comment line; blank lines are skipped. Frames must strictly
/// increase. Throws ParseError (Parse, DuplicateFrame or Ordering) with the line.
std::vector<AnnotationRecord> parse_annotations(std::string_view text);
std::vector<AnnotationRecord> load_annotations(const std::string& path);

/// Shortest round-trip number formatting, one record per line.
std::string serialize_annotations(std::span<const AnnotationRecord> records);

std::vector<AnnotationRecord> to_annotations(std::span<const std::optional<BoundingBox>> boxes);
std::vector<AnnotationRecord> to_annotations(std::span<const BoundingBox> boxes);

/// Dense per-frame stream of length `frames`; unlisted frames are absent.
std::vector<std::optional<BoundingBox>> to_stream(std::span<const AnnotationRecord> records,
                                                  std::size_t frames);

/// frame,cx,cy,w,h,px,py,vx,vy,ax,ay,observed,c00..c33; lost boxes print '-'.
void write_state_trace(std::ostream& out, const Trajectory& trajectory);

std::string format_number(double value);

}  // namespace phyot
