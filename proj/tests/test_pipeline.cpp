#include <doctest.h>

#include "oy3d/error.hpp"
#include "oy3d/evalap.hpp"
#include "oy3d/pipeline.hpp"
#include "scene_helpers.hpp"

using namespace oy3d;

namespace {

std::vector<EvalPrediction> to_eval(const LabelResult& result, const ProposalSet& props) {
  std::vector<EvalPrediction> preds;
  for (const auto& inst : result.instances) {
    EvalPrediction p;
    p.point_indices = props.mask(inst.proposal_id);
    p.class_id = inst.class_id;
    p.score = inst.score;
    preds.push_back(std::move(p));
  }
  return preds;
}

bool same_predictions(const LabelResult& a, const LabelResult& b) {
  if (a.instances.size() != b.instances.size()) return false;
  if (a.unlabeled.size() != b.unlabeled.size()) return false;
  for (std::size_t i = 0; i < a.instances.size(); ++i) {
    const auto& x = a.instances[i];
    const auto& y = b.instances[i];
    if (x.proposal_id != y.proposal_id || x.class_id != y.class_id || x.prompt != y.prompt ||
        x.s_class != y.s_class || x.s_iou != y.s_iou || x.score != y.score)
      return false;
  }
  for (std::size_t i = 0; i < a.unlabeled.size(); ++i)
    if (a.unlabeled[i].proposal_id != b.unlabeled[i].proposal_id) return false;
  return true;
}

}  // namespace

TEST_CASE("noiseless closed loop labels everything exactly") {
  const auto scene = generate_scene(testing::separated_pair_config(21));
  RunConfig cfg;
  cfg.topk = 10;
  const LabelResult result = run_label_pipeline(scene.bundle, cfg);

  REQUIRE(result.instances.size() == 2);
  CHECK(result.unlabeled.empty());
  for (const auto& inst : result.instances) {
    CHECK(inst.labeled);
    CHECK(inst.class_id == scene.gt_class_of_proposal[inst.proposal_id]);
    CHECK(inst.s_class == 1.0);  // disjoint per-frame boxes leave no wrong votes
    CHECK(inst.s_iou > 0.5);
    CHECK(inst.score == inst.s_iou * inst.s_class);
  }

  const auto report = evaluate_ap(to_eval(result, scene.bundle.proposals), scene.ground_truth);
  CHECK(report.map == 1.0);
  CHECK(report.map50 == 1.0);
  CHECK(report.map25 == 1.0);
}

TEST_CASE("a scene with no detections yields only diagnostics") {
  auto scene = generate_scene(testing::separated_pair_config(22, 0.0, 6, 300));
  for (auto& dets : scene.bundle.detections) dets.clear();
  RunConfig cfg;
  cfg.keep_unlabeled = true;
  const LabelResult result = run_label_pipeline(scene.bundle, cfg);
  CHECK(result.instances.empty());
  CHECK(result.unlabeled.size() == 2);
}

TEST_CASE("reported proposal ids are pre-NMS indices") {
  auto scene = generate_scene(testing::separated_pair_config(23, 0.0, 6, 300));
  const auto& orig = scene.bundle.proposals;
  // Prepend a lower-confidence near-duplicate of proposal 0: NMS must drop
  // it and the survivors keep their original ids 1 and 2.
  std::vector<std::vector<std::uint32_t>> masks{orig.mask(0)};
  std::vector<double> confs{orig.confidence(0) * 0.5};
  for (std::size_t j = 0; j < orig.size(); ++j) {
    masks.push_back(orig.mask(j));
    confs.push_back(orig.confidence(j));
  }
  scene.bundle.proposals = ProposalSet(std::move(masks), std::move(confs), orig.num_points());

  const LabelResult result = run_label_pipeline(scene.bundle, RunConfig{});
  REQUIRE(result.instances.size() == 2);
  CHECK(result.instances[0].proposal_id == 1);
  CHECK(result.instances[1].proposal_id == 2);
}

TEST_CASE("results are identical at any thread count") {
  const auto scene = generate_scene(testing::random_scene_config(303));
  RunConfig cfg;
  cfg.topk = 10;
  cfg.keep_unlabeled = true;
  cfg.threads = 1;
  const LabelResult serial = run_label_pipeline(scene.bundle, cfg);
  cfg.threads = 4;
  const LabelResult parallel4 = run_label_pipeline(scene.bundle, cfg);
  cfg.threads = 3;
  const LabelResult parallel3 = run_label_pipeline(scene.bundle, cfg);
  CHECK(same_predictions(serial, parallel4));
  CHECK(same_predictions(serial, parallel3));
}

TEST_CASE("stage timings cover the four stages in order") {
  const auto scene = generate_scene(testing::separated_pair_config(24, 0.0, 4, 200));
  const LabelResult result = run_label_pipeline(scene.bundle, RunConfig{});
  REQUIRE(result.stage_seconds.size() == 4);
  CHECK(result.stage_seconds[0].first == "nms");
  CHECK(result.stage_seconds[1].first == "label_maps");
  CHECK(result.stage_seconds[2].first == "visibility");
  CHECK(result.stage_seconds[3].first == "mvpdist_scoring");
  for (const auto& [name, secs] : result.stage_seconds) CHECK(secs >= 0.0);
}

TEST_CASE("invalid run configs are rejected") {
  const auto scene = generate_scene(testing::separated_pair_config(25, 0.0, 4, 200));
  RunConfig cfg;
  cfg.topk = 0;
  CHECK_THROWS_AS(run_label_pipeline(scene.bundle, cfg), ValidationError);
  cfg.topk = 10;
  cfg.nms_iou = 0.0;
  CHECK_THROWS_AS(run_label_pipeline(scene.bundle, cfg), ValidationError);
}
