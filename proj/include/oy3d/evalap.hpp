#pragma once

#include <cstdint>
#include <map>
#include <vector>

namespace oy3d {

struct GroundTruthInstance {
  std::vector<std::uint32_t> point_indices;  // sorted ascending
  int class_id = 0;
};

/// A prediction as the evaluator sees it: the point-set mask, the class
/// and the confidence used for ranking.
struct EvalPrediction {
  std::vector<std::uint32_t> point_indices;  // sorted ascending
  int class_id = 0;
  double score = 0.0;
};

struct APReport {
  double map = 0.0;    // mean over thresholds 0.50:0.05:0.95
  double map50 = 0.0;  // at 0.50
  double map25 = 0.0;  // at 0.25
  std::map<int, double> per_class_map;  // classes present in GT
};

// Mean AP over classes present in GT at one mask-overlap threshold.
// Predictions are ranked by score descending (stable on input order);
// each is greedily matched to the unmatched same-class GT instance with
// the highest point-set IoU, a TP when that IoU reaches the threshold.
// AP uses all-point interpolation (non-increasing precision envelope).
double mean_ap_at_threshold(const std::vector<EvalPrediction>& preds,
                            const std::vector<GroundTruthInstance>& gts, double threshold,
                            std::map<int, double>* per_class = nullptr);

APReport evaluate_ap(const std::vector<EvalPrediction>& preds,
                     const std::vector<GroundTruthInstance>& gts);

}  // namespace oy3d
