#pragma once

#include <cstdint>
#include <vector>

#include "oy3d/geometry.hpp"

namespace oy3d {

/// Class-agnostic 3D instance proposals: sparse point-index sets over the
/// cloud plus the proposal network's confidence per mask. Indices are
/// normalized to ascending order at construction.
class ProposalSet {
 public:
  ProposalSet(std::vector<std::vector<std::uint32_t>> masks, std::vector<double> confidences,
              std::size_t num_points);

  std::size_t size() const { return masks_.size(); }
  std::size_t num_points() const { return num_points_; }
  const std::vector<std::uint32_t>& mask(std::size_t j) const { return masks_[j]; }
  std::size_t count(std::size_t j) const { return masks_[j].size(); }
  double confidence(std::size_t j) const { return confidences_[j]; }
  const std::vector<double>& confidences() const { return confidences_; }

  ProposalSet subset(const std::vector<std::size_t>& keep) const;

 private:
  std::vector<std::vector<std::uint32_t>> masks_;
  std::vector<double> confidences_;
  std::size_t num_points_;
};

struct VisibilityConfig {
  double tau_depth = 0.10;  // meters
  bool treat_invalid_depth_as_occluded = true;
};

/// Per-point visibility booleans, frame-major (num_frames x num_points).
/// unoccluded implies in_frame: the depth test is only evaluated for
/// in-frame points, out-of-frame entries are false in both.
struct PointVisibility {
  std::size_t num_frames = 0;
  std::size_t num_points = 0;
  std::vector<std::uint8_t> in_frame;
  std::vector<std::uint8_t> unoccluded;

  bool visible(std::size_t frame, std::size_t point) const {
    return unoccluded[frame * num_points + point] != 0;
  }
  const std::uint8_t* unoccluded_row(std::size_t frame) const {
    return unoccluded.data() + frame * num_points;
  }
};

/// Fractions of each mask's points visible per frame, frame-major
/// (num_frames x num_proposals), each in [0,1].
struct VisibilityMatrix {
  std::size_t num_frames = 0;
  std::size_t num_proposals = 0;
  std::vector<double> fractions;

  double at(std::size_t frame, std::size_t proposal) const {
    return fractions[frame * num_proposals + proposal];
  }
};

// A point is in frame iff its camera-space depth is positive and its
// rounded pixel lands inside [0,W)x[0,H).
bool point_in_frame(double pixel_x, double pixel_y, double depth_z, int width, int height);

// Fills pv.in_frame for all frames.
void compute_frame_visibility(const std::vector<Projection>& projections,
                              const std::vector<CameraFrame>& frames, PointVisibility& pv);

// Fills pv.unoccluded from pv.in_frame: the depth map is sampled at the
// rounded pixel and compared to the projected depth within tau_depth.
// Throws ValidationError when a depth map's dimensions mismatch its frame.
void compute_depth_visibility(const std::vector<Projection>& projections,
                              const std::vector<CameraFrame>& frames,
                              const std::vector<DepthMap>& depth_maps,
                              const VisibilityConfig& cfg, PointVisibility& pv);

// Both tests in one pass, parallel over frames, without retaining the
// projections: each frame is projected, tested and dropped.
PointVisibility compute_point_visibility(const PointCloud& cloud,
                                         const std::vector<CameraFrame>& frames,
                                         const std::vector<DepthMap>& depth_maps,
                                         const VisibilityConfig& cfg);

VisibilityMatrix compute_mask_visibility(const PointVisibility& pv, const ProposalSet& props);

// Brute-force reference: explicit per-frame, per-point scalar loops with
// no batching or parallelism. Defined as ground truth for the fast path.
PointVisibility oracle_point_visibility(const PointCloud& cloud,
                                        const std::vector<CameraFrame>& frames,
                                        const std::vector<DepthMap>& depth_maps,
                                        const VisibilityConfig& cfg);

VisibilityMatrix oracle_mask_visibility(const PointCloud& cloud,
                                        const std::vector<CameraFrame>& frames,
                                        const std::vector<DepthMap>& depth_maps,
                                        const ProposalSet& props, const VisibilityConfig& cfg);

}  // namespace oy3d
