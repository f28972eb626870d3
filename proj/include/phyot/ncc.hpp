#pragma once

#include "phyot/geometry.hpp"
#include "phyot/image.hpp"

namespace phyot {

struct TemplateMatch {
  BoundingBox box;
  double score = 0.0;
};

/// Exhaustive zero-normalized cross-correlation over every placement of
/// `templ` fully inside `search` (clipped to the frame). Ties resolve to the
/// smallest (y, x) top-left corner. Flat candidate patches score 0.
///
/// Throws DegenerateTemplate for a zero-variance template and InvalidInput
/// when the template does not fit in the search region.
TemplateMatch ncc_template_match(const GrayImage& frame, const GrayImage& templ,
                                 const BoundingBox& search);

/// Integer pixel patch under `box` (corner rounded to the nearest pixel).
GrayImage extract_patch(const GrayImage& frame, const BoundingBox& box);

}  // namespace phyot
