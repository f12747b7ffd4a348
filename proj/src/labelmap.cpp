#include "oy3d/labelmap.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <string>

#include "oy3d/error.hpp"

namespace oy3d {

void validate_vocabulary(const PromptVocabulary& vocab) {
  if (vocab.prompts.empty()) throw ValidationError("vocabulary is empty");
  std::set<std::string> seen;
  for (const auto& p : vocab.prompts)
    if (!seen.insert(p).second) throw ValidationError("duplicate prompt: " + p);
}

Detection2D clamp_detection(Detection2D det, int width, int height, std::size_t vocab_size) {
  if (!(std::isfinite(det.x1) && std::isfinite(det.y1) && std::isfinite(det.x2) &&
        std::isfinite(det.y2)))
    throw ValidationError("detection box has non-finite coordinate");
  det.x1 = std::clamp(det.x1, 0.0, static_cast<double>(width));
  det.x2 = std::clamp(det.x2, 0.0, static_cast<double>(width));
  det.y1 = std::clamp(det.y1, 0.0, static_cast<double>(height));
  det.y2 = std::clamp(det.y2, 0.0, static_cast<double>(height));
  if (!(det.x1 < det.x2 && det.y1 < det.y2))
    throw ValidationError("degenerate detection box after clamping");
  if (det.class_id < 0 || static_cast<std::size_t>(det.class_id) >= vocab_size)
    throw ValidationError("detection class_id " + std::to_string(det.class_id) +
                          " out of vocabulary range");
  if (!(det.score >= 0.0 && det.score <= 1.0))
    throw ValidationError("detection score outside [0,1]");
  if (det.pixel_mask &&
      (det.pixel_mask->width != width || det.pixel_mask->height != height ||
       det.pixel_mask->bits.size() != static_cast<std::size_t>(width) * height))
    throw ValidationError("detection pixel mask dimensions do not match frame");
  return det;
}

double box_weight(const Detection2D& det) { return (det.y2 - det.y1) + (det.x2 - det.x1); }

LabelMap::LabelMap(int width, int height)
    : width_(width), height_(height),
      labels_(static_cast<std::size_t>(width) * height, -1) {
  if (width <= 0 || height <= 0) throw ValidationError("label map dimensions must be positive");
}

LabelMap build_label_map(const std::vector<Detection2D>& dets, int width, int height,
                         LabelMapMode mode) {
  LabelMap map(width, height);

  // Stable sort keeps ingest order for equal weights; painting high to low
  // weight means the later equal-weight detection is painted last and wins.
  std::vector<std::size_t> order(dets.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return box_weight(dets[a]) > box_weight(dets[b]);
  });

  for (std::size_t idx : order) {
    const Detection2D& det = dets[idx];
    if (mode == LabelMapMode::HG) {
      if (!det.pixel_mask)
        throw ValidationError("HG label map requested but detection has no pixel mask");
      const PixelMask& m = *det.pixel_mask;
      for (int v = 0; v < height; ++v)
        for (int u = 0; u < width; ++u)
          if (m.at(u, v)) map.set(u, v, det.class_id);
    } else {
      // Half-open raster membership: x1 <= u < x2 on floored bounds.
      const int u0 = std::max(0, static_cast<int>(std::floor(det.x1)));
      const int u1 = std::min(width, static_cast<int>(std::floor(det.x2)));
      const int v0 = std::max(0, static_cast<int>(std::floor(det.y1)));
      const int v1 = std::min(height, static_cast<int>(std::floor(det.y2)));
      for (int v = v0; v < v1; ++v)
        for (int u = u0; u < u1; ++u) map.set(u, v, det.class_id);
    }
  }
  return map;
}

}  // namespace oy3d
