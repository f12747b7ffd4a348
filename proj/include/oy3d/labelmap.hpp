#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace oy3d {

/// Ordered open-vocabulary text prompts; the class id of a prompt is its
/// index in the list.
struct PromptVocabulary {
  std::vector<std::string> prompts;

  std::size_t size() const { return prompts.size(); }
};

void validate_vocabulary(const PromptVocabulary& vocab);

/// Dense binary pixel mask used by high-granularity label maps.
struct PixelMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> bits;  // row-major, nonzero = inside

  bool at(int u, int v) const { return bits[static_cast<std::size_t>(v) * width + u] != 0; }
  bool operator==(const PixelMask&) const = default;
};

/// One 2D detector output: a box in pixel coordinates with x1 < x2,
/// y1 < y2, a class id into the vocabulary and the detector confidence.
/// The pixel mask is only present when an external segmenter supplied one.
struct Detection2D {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
  int class_id = 0;
  double score = 0.0;
  std::optional<PixelMask> pixel_mask;
};

// Clamps the box to [0,W]x[0,H] and validates it. Throws ValidationError
// if the clamped box is degenerate, the class id is out of vocabulary
// range, or the score is outside [0,1].
Detection2D clamp_detection(Detection2D det, int width, int height, std::size_t vocab_size);

// Box weight w = height + width; drives the paint order of label maps.
double box_weight(const Detection2D& det);

enum class LabelMapMode { LG, HG };

/// Per-frame class raster; -1 means no class.
class LabelMap {
 public:
  LabelMap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  std::int32_t at(int u, int v) const {
    return labels_[static_cast<std::size_t>(v) * width_ + u];
  }
  void set(int u, int v, std::int32_t label) {
    labels_[static_cast<std::size_t>(v) * width_ + u] = label;
  }
  const std::vector<std::int32_t>& labels() const { return labels_; }
  bool operator==(const LabelMap&) const = default;

 private:
  int width_;
  int height_;
  std::vector<std::int32_t> labels_;
};

// Paints detections in descending-weight order so that smaller regions
// overwrite larger ones. Equal weights paint in ingest order, so the later
// detection wins. LG paints the box rectangle (half-open, floored bounds);
// HG paints the pixel mask and requires one on every detection.
LabelMap build_label_map(const std::vector<Detection2D>& dets, int width, int height,
                         LabelMapMode mode);

}  // namespace oy3d
