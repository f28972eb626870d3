#include "phyot/ncc.hpp"

#include <algorithm>
#include <cmath>

#include "phyot/error.hpp"

namespace phyot {

GrayImage extract_patch(const GrayImage& frame, const BoundingBox& box) {
  if (!box.valid()) throw Error(ErrorCode::InvalidInput, "extract_patch: invalid box");
  const int x = static_cast<int>(std::lround(box.left()));
  const int y = static_cast<int>(std::lround(box.top()));
  const int w = std::max(1, static_cast<int>(std::lround(box.w)));
  const int h = std::max(1, static_cast<int>(std::lround(box.h)));
  return frame.crop(x, y, w, h);
}

TemplateMatch ncc_template_match(const GrayImage& frame, const GrayImage& templ,
                                 const BoundingBox& search) {
  if (!search.valid()) throw Error(ErrorCode::InvalidInput, "ncc: invalid search box");
  const int tw = templ.width();
  const int th = templ.height();
  const auto n = static_cast<double>(tw) * th;
  if (tw == 0 || th == 0) throw Error(ErrorCode::InvalidInput, "ncc: empty template");

  double tmean = 0.0;
  for (double v : templ.pixels().values()) tmean += v;
  tmean /= n;
  std::vector<double> tz(templ.pixels().values().begin(), templ.pixels().values().end());
  double tnorm = 0.0;
  for (double& v : tz) {
    v -= tmean;
    tnorm += v * v;
  }
  if (tnorm <= 1e-12 * n) {
    throw Error(ErrorCode::DegenerateTemplate, "ncc: template has zero variance");
  }
  tnorm = std::sqrt(tnorm);

  const int x0 = std::max(0, static_cast<int>(std::floor(search.left())));
  const int y0 = std::max(0, static_cast<int>(std::floor(search.top())));
  const int x1 = std::min(frame.width(), static_cast<int>(std::ceil(search.right())));
  const int y1 = std::min(frame.height(), static_cast<int>(std::ceil(search.bottom())));
  if (x1 - x0 < tw || y1 - y0 < th) {
    throw Error(ErrorCode::InvalidInput, "ncc: template larger than search region");
  }

  const Grid& img = frame.pixels();
  TemplateMatch best{{}, -2.0};
  for (int y = y0; y + th <= y1; ++y) {
    for (int x = x0; x + tw <= x1; ++x) {
      double sum = 0.0, sum_sq = 0.0, cross = 0.0;
      for (int j = 0; j < th; ++j) {
        const double* trow = tz.data() + static_cast<std::size_t>(j) * tw;
        for (int i = 0; i < tw; ++i) {
          const double p = img(x + i, y + j);
          sum += p;
          sum_sq += p * p;
          cross += p * trow[i];
        }
      }
      // sum(t_z) = 0, so cross equals the covariance term without centering p.
      const double var = sum_sq - sum * sum / n;
      const double score = var > 1e-12 * n ? std::clamp(cross / (tnorm * std::sqrt(var)), -1.0, 1.0)
                                           : 0.0;
      if (score > best.score) {
        best.score = score;
        best.box = BoundingBox::from_corner(x, y, tw, th);
      }
    }
  }
  return best;
}

}  // namespace phyot
