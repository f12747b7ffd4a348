#include "oy3d/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "oy3d/error.hpp"
#include "oy3d/mvpdist.hpp"
#include "oy3d/parallel.hpp"

namespace oy3d {

namespace {

class StageClock {
 public:
  explicit StageClock(std::vector<std::pair<std::string, double>>& out) : out_(out) {}
  void lap(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    out_.emplace_back(name, std::chrono::duration<double>(now - last_).count());
    last_ = now;
  }

 private:
  std::vector<std::pair<std::string, double>>& out_;
  std::chrono::steady_clock::time_point last_ = std::chrono::steady_clock::now();
};

}  // namespace

LabelResult run_label_pipeline(const SceneBundle& bundle, const RunConfig& cfg) {
  if (cfg.topk < 1) throw ValidationError("topk must be >= 1");
  set_max_threads(cfg.threads);

  LabelResult result;
  StageClock clock(result.stage_seconds);

  const std::vector<std::size_t> kept = nms_keep_indices(bundle.proposals, cfg.nms_iou);
  const ProposalSet props = bundle.proposals.subset(kept);
  clock.lap("nms");

  std::vector<LabelMap> label_maps;
  label_maps.reserve(bundle.frames.size());
  for (const auto& frame : bundle.frames) label_maps.emplace_back(frame.width, frame.height);
  parallel_for(bundle.frames.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i)
      label_maps[i] = build_label_map(bundle.detections[i], bundle.frames[i].width,
                                      bundle.frames[i].height, cfg.label_map_mode);
  });
  clock.lap("label_maps");

  const VisibilityConfig vis_cfg{cfg.tau_depth, true};
  const PointVisibility pv =
      compute_point_visibility(bundle.cloud, bundle.frames, bundle.depth_maps, vis_cfg);
  const VisibilityMatrix vis = compute_mask_visibility(pv, props);
  clock.lap("visibility");

  const OnDemandProjectionSource source(bundle.cloud, bundle.frames);
  std::vector<InstancePrediction> preds(props.size());
  parallel_for(props.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t j = begin; j < end; ++j) {
      const TopKSelection sel = select_topk_frames(vis, j, cfg.topk);
      const PromptDistribution dist =
          gather_label_distribution(j, sel, label_maps, source, pv, props);
      const ClassPrediction cls = predict_class(dist);
      preds[j] = score_mask(j, sel, bundle.detections, source, pv, props, cls,
                            bundle.vocabulary);
      preds[j].proposal_id = kept[j];  // report pre-NMS proposal ids
    }
  });
  clock.lap("mvpdist_scoring");

  for (auto& pred : preds)
    (pred.labeled ? result.instances : result.unlabeled).push_back(std::move(pred));
  const auto by_id = [](const InstancePrediction& a, const InstancePrediction& b) {
    return a.proposal_id < b.proposal_id;
  };
  std::sort(result.instances.begin(), result.instances.end(), by_id);
  std::sort(result.unlabeled.begin(), result.unlabeled.end(), by_id);
  return result;
}

}  // namespace oy3d
