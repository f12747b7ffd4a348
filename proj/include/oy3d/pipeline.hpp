#pragma once

#include <string>
#include <utility>
#include <vector>

#include "oy3d/scene_io.hpp"
#include "oy3d/scoring.hpp"
#include "oy3d/visibility.hpp"

namespace oy3d {

struct RunConfig {
  int topk = 40;
  double tau_depth = 0.10;
  double nms_iou = 0.5;
  int frame_stride = 1;
  double depth_scale = 1000.0;
  LabelMapMode label_map_mode = LabelMapMode::LG;
  bool keep_unlabeled = false;
  int threads = 0;  // 0 = all cores
};

struct LabelResult {
  std::vector<InstancePrediction> instances;  // labeled, by ascending proposal id
  std::vector<InstancePrediction> unlabeled;  // diagnostics
  std::vector<std::pair<std::string, double>> stage_seconds;
};

// Full labeling pass over an in-memory scene:
// NMS -> label maps -> visibility -> top-k -> vote gathering -> scoring.
// proposal_id in the output refers to the proposal's index in the input
// set (before NMS). Deterministic for fixed inputs and config, at any
// thread count.
LabelResult run_label_pipeline(const SceneBundle& bundle, const RunConfig& cfg);

}  // namespace oy3d
