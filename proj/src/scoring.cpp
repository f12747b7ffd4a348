#include "oy3d/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oy3d/error.hpp"

namespace oy3d {

double box_iou(const Box2D& a, const Box2D& b) {
  const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const double inter = ix * iy;
  const double area_a = (a.x2 - a.x1) * (a.y2 - a.y1);
  const double area_b = (b.x2 - b.x1) * (b.y2 - b.y1);
  const double uni = area_a + area_b - inter;
  if (uni <= 0.0) return 0.0;
  return inter / uni;
}

double point_set_iou(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  std::size_t inter = 0, ia = 0, ib = 0;
  while (ia < a.size() && ib < b.size()) {
    if (a[ia] < b[ib])
      ++ia;
    else if (b[ib] < a[ia])
      ++ib;
    else {
      ++inter;
      ++ia;
      ++ib;
    }
  }
  const std::size_t uni = a.size() + b.size() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

std::vector<std::size_t> nms_keep_indices(const ProposalSet& props, double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold <= 1.0))
    throw ValidationError("NMS IoU threshold must be in (0,1]");
  std::vector<std::size_t> order(props.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return props.confidence(a) > props.confidence(b);
  });
  std::vector<std::size_t> kept;
  for (std::size_t j : order) {
    bool suppressed = false;
    for (std::size_t k : kept) {
      if (point_set_iou(props.mask(j), props.mask(k)) >= iou_threshold) {
        suppressed = true;
        break;
      }
    }
    if (!suppressed) kept.push_back(j);
  }
  return kept;
}

ProposalSet nms_proposals(const ProposalSet& props, double iou_threshold) {
  return props.subset(nms_keep_indices(props, iou_threshold));
}

std::optional<Box2D> projected_bbox(std::size_t proposal_id, std::size_t frame_id,
                                    const FrameProjectionSource& source,
                                    const PointVisibility& pv, const ProposalSet& props) {
  const std::vector<std::uint32_t>& mask = props.mask(proposal_id);
  const std::uint8_t* vis_row = pv.unoccluded_row(frame_id);
  std::vector<double> px, py, pz;
  source.project(frame_id, mask, px, py, pz);
  bool any = false;
  long min_u = 0, min_v = 0, max_u = 0, max_v = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    if (!vis_row[mask[i]]) continue;
    const long u = std::lround(px[i]);
    const long v = std::lround(py[i]);
    if (!any) {
      min_u = max_u = u;
      min_v = max_v = v;
      any = true;
    } else {
      min_u = std::min(min_u, u);
      max_u = std::max(max_u, u);
      min_v = std::min(min_v, v);
      max_v = std::max(max_v, v);
    }
  }
  if (!any) return std::nullopt;
  return Box2D{static_cast<double>(min_u), static_cast<double>(min_v),
               static_cast<double>(max_u), static_cast<double>(max_v)};
}

std::optional<Box2D> projected_bbox(std::size_t proposal_id, std::size_t frame_id,
                                    const std::vector<Projection>& projections,
                                    const PointVisibility& pv, const ProposalSet& props) {
  return projected_bbox(proposal_id, frame_id, CachedProjectionSource(projections), pv, props);
}

InstancePrediction score_mask(std::size_t proposal_id, const TopKSelection& sel,
                              const std::vector<std::vector<Detection2D>>& detections,
                              const FrameProjectionSource& source, const PointVisibility& pv,
                              const ProposalSet& props, const ClassPrediction& cls,
                              const PromptVocabulary& vocab) {
  InstancePrediction pred;
  pred.proposal_id = proposal_id;
  if (sel.empty() || !cls.class_id.has_value()) return pred;  // unlabeled

  double iou_sum = 0.0;
  for (std::size_t frame : sel.frame_ids) {
    const std::optional<Box2D> box = projected_bbox(proposal_id, frame, source, pv, props);
    double best = 0.0;
    if (box) {
      for (const Detection2D& det : detections.at(frame))
        best = std::max(best, box_iou(*box, Box2D{det.x1, det.y1, det.x2, det.y2}));
    }
    iou_sum += best;
  }
  pred.labeled = true;
  pred.class_id = *cls.class_id;
  pred.prompt = vocab.prompts.at(static_cast<std::size_t>(*cls.class_id));
  pred.s_class = cls.s_class;
  pred.s_iou = iou_sum / static_cast<double>(sel.frame_ids.size());
  pred.score = pred.s_iou * pred.s_class;
  return pred;
}

InstancePrediction score_mask(std::size_t proposal_id, const TopKSelection& sel,
                              const std::vector<std::vector<Detection2D>>& detections,
                              const std::vector<Projection>& projections,
                              const PointVisibility& pv, const ProposalSet& props,
                              const ClassPrediction& cls, const PromptVocabulary& vocab) {
  return score_mask(proposal_id, sel, detections, CachedProjectionSource(projections), pv, props,
                    cls, vocab);
}

}  // namespace oy3d
