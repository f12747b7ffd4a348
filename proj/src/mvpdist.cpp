#include "oy3d/mvpdist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "oy3d/error.hpp"

namespace oy3d {

void CachedProjectionSource::project(std::size_t frame_id,
                                     const std::vector<std::uint32_t>& indices,
                                     std::vector<double>& pixel_x, std::vector<double>& pixel_y,
                                     std::vector<double>& depth_z) const {
  const Projection& proj = projections_.at(frame_id);
  pixel_x.resize(indices.size());
  pixel_y.resize(indices.size());
  depth_z.resize(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    pixel_x[i] = proj.pixel_x[indices[i]];
    pixel_y[i] = proj.pixel_y[indices[i]];
    depth_z[i] = proj.depth_z[indices[i]];
  }
}

void OnDemandProjectionSource::project(std::size_t frame_id,
                                       const std::vector<std::uint32_t>& indices,
                                       std::vector<double>& pixel_x, std::vector<double>& pixel_y,
                                       std::vector<double>& depth_z) const {
  project_subset(cloud_, frames_.at(frame_id), indices, pixel_x, pixel_y, depth_z);
}

TopKSelection select_topk_frames(const VisibilityMatrix& vis, std::size_t proposal_id, int k) {
  if (k < 1) throw ValidationError("top-k must be at least 1");
  std::vector<std::size_t> order(vis.num_frames);
  std::iota(order.begin(), order.end(), 0);
  // Stable sort on descending fraction keeps the lower frame id first
  // among ties.
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return vis.at(a, proposal_id) > vis.at(b, proposal_id);
  });
  TopKSelection sel;
  for (std::size_t i = 0; i < order.size() && sel.frame_ids.size() < static_cast<std::size_t>(k);
       ++i) {
    if (vis.at(order[i], proposal_id) <= 0.0) break;  // sorted, rest are zero too
    sel.frame_ids.push_back(order[i]);
  }
  return sel;
}

PromptDistribution gather_label_distribution(std::size_t proposal_id, const TopKSelection& sel,
                                             const std::vector<LabelMap>& label_maps,
                                             const FrameProjectionSource& source,
                                             const PointVisibility& pv,
                                             const ProposalSet& props) {
  PromptDistribution dist;
  const std::vector<std::uint32_t>& mask = props.mask(proposal_id);
  std::vector<double> px, py, pz;
  for (std::size_t frame : sel.frame_ids) {
    const LabelMap& map = label_maps.at(frame);
    const std::uint8_t* vis_row = pv.unoccluded_row(frame);
    source.project(frame, mask, px, py, pz);
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (!vis_row[mask[i]]) continue;
      const int u = static_cast<int>(std::lround(px[i]));
      const int v = static_cast<int>(std::lround(py[i]));
      const std::int32_t label = map.at(u, v);
      if (label < 0) continue;
      ++dist.histogram[label];
      ++dist.total_votes;
    }
  }
  return dist;
}

PromptDistribution gather_label_distribution(std::size_t proposal_id, const TopKSelection& sel,
                                             const std::vector<LabelMap>& label_maps,
                                             const std::vector<Projection>& projections,
                                             const PointVisibility& pv,
                                             const ProposalSet& props) {
  return gather_label_distribution(proposal_id, sel, label_maps,
                                   CachedProjectionSource(projections), pv, props);
}

ClassPrediction predict_class(const PromptDistribution& dist) {
  ClassPrediction pred;
  if (dist.total_votes == 0) return pred;
  long best = -1;
  // std::map iterates in ascending class id, so the first strict maximum
  // wins and ties resolve to the lower class id.
  for (const auto& [cls, cnt] : dist.histogram) {
    if (cnt > best) {
      best = cnt;
      pred.class_id = cls;
    }
  }
  pred.s_class = static_cast<double>(best) / static_cast<double>(dist.total_votes);
  return pred;
}

}  // namespace oy3d
