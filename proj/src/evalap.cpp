#include "oy3d/evalap.hpp"

#include <algorithm>
#include <numeric>
#include <set>

#include "oy3d/error.hpp"
#include "oy3d/scoring.hpp"

namespace oy3d {

namespace {

// AP for one class at one threshold. pred_order holds indices into preds
// already ranked globally by score; only this class's entries are used.
double class_ap(const std::vector<EvalPrediction>& preds,
                const std::vector<std::size_t>& pred_order,
                const std::vector<const GroundTruthInstance*>& gts, int class_id,
                double threshold) {
  std::vector<bool> gt_matched(gts.size(), false);
  std::vector<bool> is_tp;
  for (std::size_t pi : pred_order) {
    if (preds[pi].class_id != class_id) continue;
    double best_iou = 0.0;
    std::size_t best_gt = gts.size();
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gt_matched[g]) continue;
      const double iou = point_set_iou(preds[pi].point_indices, gts[g]->point_indices);
      if (iou > best_iou) {
        best_iou = iou;
        best_gt = g;
      }
    }
    if (best_gt < gts.size() && best_iou >= threshold) {
      gt_matched[best_gt] = true;
      is_tp.push_back(true);
    } else {
      is_tp.push_back(false);
    }
  }

  if (gts.empty()) return 0.0;
  std::size_t tp = 0, fp = 0;
  std::vector<double> precision, recall;
  precision.reserve(is_tp.size());
  recall.reserve(is_tp.size());
  for (bool t : is_tp) {
    t ? ++tp : ++fp;
    precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    recall.push_back(static_cast<double>(tp) / static_cast<double>(gts.size()));
  }
  // Non-increasing precision envelope, then area under the PR curve.
  for (std::size_t i = precision.size(); i-- > 1;)
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  double ap = 0.0;
  double prev_recall = 0.0;
  for (std::size_t i = 0; i < precision.size(); ++i) {
    ap += (recall[i] - prev_recall) * precision[i];
    prev_recall = recall[i];
  }
  return ap;
}

}  // namespace

double mean_ap_at_threshold(const std::vector<EvalPrediction>& preds,
                            const std::vector<GroundTruthInstance>& gts, double threshold,
                            std::map<int, double>* per_class) {
  for (const auto& g : gts)
    if (g.point_indices.empty()) throw ValidationError("ground truth instance has no points");

  std::vector<std::size_t> order(preds.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return preds[a].score > preds[b].score; });

  // Classes absent from GT are skipped, not scored as zero.
  std::set<int> classes;
  for (const auto& g : gts) classes.insert(g.class_id);
  if (classes.empty()) return 0.0;

  double sum = 0.0;
  for (int cls : classes) {
    std::vector<const GroundTruthInstance*> cls_gts;
    for (const auto& g : gts)
      if (g.class_id == cls) cls_gts.push_back(&g);
    const double ap = class_ap(preds, order, cls_gts, cls, threshold);
    if (per_class) (*per_class)[cls] += ap;
    sum += ap;
  }
  return sum / static_cast<double>(classes.size());
}

APReport evaluate_ap(const std::vector<EvalPrediction>& preds,
                     const std::vector<GroundTruthInstance>& gts) {
  APReport report;
  report.map25 = mean_ap_at_threshold(preds, gts, 0.25);
  report.map50 = mean_ap_at_threshold(preds, gts, 0.50);
  std::map<int, double> per_class_sum;
  double sum = 0.0;
  int count = 0;
  for (int t = 50; t <= 95; t += 5) {
    sum += mean_ap_at_threshold(preds, gts, t / 100.0, &per_class_sum);
    ++count;
  }
  report.map = sum / count;
  for (auto& [cls, total] : per_class_sum) report.per_class_map[cls] = total / count;
  return report;
}

}  // namespace oy3d
