#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "oy3d/geometry.hpp"
#include "oy3d/labelmap.hpp"
#include "oy3d/visibility.hpp"

namespace oy3d {

/// Vote histogram over class ids for one proposal. Votes that land on the
/// -1 background are excluded from both the histogram and the total.
struct PromptDistribution {
  std::map<int, long> histogram;
  long total_votes = 0;
};

/// Frames ordered by descending visibility fraction; zero-visibility
/// frames are never included even when fewer than k frames remain.
struct TopKSelection {
  std::vector<std::size_t> frame_ids;

  bool empty() const { return frame_ids.empty(); }
};

struct ClassPrediction {
  std::optional<int> class_id;
  double s_class = 0.0;
};

// Supplies projected coordinates for a subset of points in one frame.
// Lets the gather stage run either on cached full projections (small
// scenes, tests) or on-demand per proposal (large scenes) with identical
// arithmetic.
class FrameProjectionSource {
 public:
  virtual ~FrameProjectionSource() = default;
  virtual void project(std::size_t frame_id, const std::vector<std::uint32_t>& indices,
                       std::vector<double>& pixel_x, std::vector<double>& pixel_y,
                       std::vector<double>& depth_z) const = 0;
};

class CachedProjectionSource final : public FrameProjectionSource {
 public:
  explicit CachedProjectionSource(const std::vector<Projection>& projections)
      : projections_(projections) {}
  void project(std::size_t frame_id, const std::vector<std::uint32_t>& indices,
               std::vector<double>& pixel_x, std::vector<double>& pixel_y,
               std::vector<double>& depth_z) const override;

 private:
  const std::vector<Projection>& projections_;
};

class OnDemandProjectionSource final : public FrameProjectionSource {
 public:
  OnDemandProjectionSource(const PointCloud& cloud, const std::vector<CameraFrame>& frames)
      : cloud_(cloud), frames_(frames) {}
  void project(std::size_t frame_id, const std::vector<std::uint32_t>& indices,
               std::vector<double>& pixel_x, std::vector<double>& pixel_y,
               std::vector<double>& depth_z) const override;

 private:
  const PointCloud& cloud_;
  const std::vector<CameraFrame>& frames_;
};

// The k frames with highest visibility fraction for this proposal, ties
// broken toward the lower frame id; zero fractions are dropped.
TopKSelection select_topk_frames(const VisibilityMatrix& vis, std::size_t proposal_id, int k);

// Every mask point that is in-frame and unoccluded in a selected frame
// votes with the label at its rounded pixel; -1 labels are discarded.
PromptDistribution gather_label_distribution(std::size_t proposal_id, const TopKSelection& sel,
                                             const std::vector<LabelMap>& label_maps,
                                             const FrameProjectionSource& source,
                                             const PointVisibility& pv,
                                             const ProposalSet& props);

PromptDistribution gather_label_distribution(std::size_t proposal_id, const TopKSelection& sel,
                                             const std::vector<LabelMap>& label_maps,
                                             const std::vector<Projection>& projections,
                                             const PointVisibility& pv,
                                             const ProposalSet& props);

// Argmax class by vote count (ties toward the lower class id) with
// s_class = max_count / total_votes; empty distribution -> no class, 0.
ClassPrediction predict_class(const PromptDistribution& dist);

}  // namespace oy3d
