#pragma once

#include <optional>
#include <string>
#include <vector>

#include "oy3d/labelmap.hpp"
#include "oy3d/mvpdist.hpp"
#include "oy3d/visibility.hpp"

namespace oy3d {

struct Box2D {
  double x1 = 0, y1 = 0, x2 = 0, y2 = 0;
};

double box_iou(const Box2D& a, const Box2D& b);

/// One labeled instance. score = s_iou * s_class. `labeled` is false when
/// the proposal had an empty distribution or selection; such instances
/// carry class_id -1 and score 0 and are reported as diagnostics only.
struct InstancePrediction {
  std::size_t proposal_id = 0;
  int class_id = -1;
  std::string prompt;
  double s_class = 0.0;
  double s_iou = 0.0;
  double score = 0.0;
  bool labeled = false;
};

// |A intersect B| / |A union B| over the two index sets (each sorted
// ascending, as ProposalSet stores them).
double point_set_iou(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b);

// Greedy NMS in descending network-confidence order: a proposal is dropped
// when its point-set IoU with an already kept proposal reaches the
// threshold. Returns the kept indices into the input set, in kept order.
std::vector<std::size_t> nms_keep_indices(const ProposalSet& props, double iou_threshold);

ProposalSet nms_proposals(const ProposalSet& props, double iou_threshold);

// Axis-aligned envelope of the rounded pixels of the proposal's in-frame,
// unoccluded points in the given frame; nullopt when no point qualifies.
std::optional<Box2D> projected_bbox(std::size_t proposal_id, std::size_t frame_id,
                                    const FrameProjectionSource& source,
                                    const PointVisibility& pv, const ProposalSet& props);

std::optional<Box2D> projected_bbox(std::size_t proposal_id, std::size_t frame_id,
                                    const std::vector<Projection>& projections,
                                    const PointVisibility& pv, const ProposalSet& props);

// s_iou is the mean over the selected frames of the best box IoU between
// the projected mask bbox and any detector box in that frame (all
// classes). Frames without a projected bbox or without detections
// contribute 0. Empty selection or missing class -> unlabeled, score 0.
InstancePrediction score_mask(std::size_t proposal_id, const TopKSelection& sel,
                              const std::vector<std::vector<Detection2D>>& detections,
                              const FrameProjectionSource& source, const PointVisibility& pv,
                              const ProposalSet& props, const ClassPrediction& cls,
                              const PromptVocabulary& vocab);

InstancePrediction score_mask(std::size_t proposal_id, const TopKSelection& sel,
                              const std::vector<std::vector<Detection2D>>& detections,
                              const std::vector<Projection>& projections,
                              const PointVisibility& pv, const ProposalSet& props,
                              const ClassPrediction& cls, const PromptVocabulary& vocab);

}  // namespace oy3d
