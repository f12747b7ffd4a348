#include <doctest.h>

#include <cmath>

#include "oy3d/error.hpp"
#include "oy3d/evalap.hpp"

using namespace oy3d;

namespace {

constexpr double kTol = 1e-9;

GroundTruthInstance gt(std::vector<std::uint32_t> pts, int cls) {
  GroundTruthInstance g;
  g.point_indices = std::move(pts);
  g.class_id = cls;
  return g;
}

EvalPrediction pred(std::vector<std::uint32_t> pts, int cls, double score) {
  EvalPrediction p;
  p.point_indices = std::move(pts);
  p.class_id = cls;
  p.score = score;
  return p;
}

}  // namespace

TEST_CASE("perfect predictions score 1.0 everywhere") {
  const std::vector<GroundTruthInstance> gts{gt({0, 1, 2, 3}, 0), gt({10, 11, 12}, 1)};
  const std::vector<EvalPrediction> preds{pred({0, 1, 2, 3}, 0, 0.9),
                                          pred({10, 11, 12}, 1, 0.8)};
  const auto rep = evaluate_ap(preds, gts);
  CHECK(std::abs(rep.map - 1.0) < kTol);
  CHECK(std::abs(rep.map50 - 1.0) < kTol);
  CHECK(std::abs(rep.map25 - 1.0) < kTol);
  CHECK(std::abs(rep.per_class_map.at(0) - 1.0) < kTol);
  CHECK(std::abs(rep.per_class_map.at(1) - 1.0) < kTol);
}

TEST_CASE("overlap 0.4 counts at the 0.25 threshold only") {
  // |inter| = 2, |union| = 5.
  const std::vector<GroundTruthInstance> gts{gt({0, 1, 2, 3}, 0)};
  const std::vector<EvalPrediction> preds{pred({0, 1, 4}, 0, 0.9)};
  const auto rep = evaluate_ap(preds, gts);
  CHECK(std::abs(rep.map25 - 1.0) < kTol);
  CHECK(std::abs(rep.map50 - 0.0) < kTol);
  CHECK(std::abs(rep.map - 0.0) < kTol);
}

TEST_CASE("a duplicate after full recall does not dent the AP") {
  // Both predictions cover the single GT; the lower-scoring one becomes a
  // false positive once the GT is taken, but recall is already 1.
  const std::vector<GroundTruthInstance> gts{gt({0, 1, 2}, 0)};
  const std::vector<EvalPrediction> preds{pred({0, 1, 2}, 0, 0.9), pred({0, 1, 2}, 0, 0.5)};
  const auto rep = evaluate_ap(preds, gts);
  CHECK(std::abs(rep.map - 1.0) < kTol);
  CHECK(std::abs(rep.map50 - 1.0) < kTol);
  CHECK(std::abs(rep.map25 - 1.0) < kTol);
}

TEST_CASE("a confident false positive halves the AP") {
  // Rank 1 misses entirely, rank 2 is exact: precision at full recall is
  // 1/2 and the all-point envelope integrates to 0.5.
  const std::vector<GroundTruthInstance> gts{gt({0, 1, 2}, 0)};
  const std::vector<EvalPrediction> preds{pred({10, 11, 12}, 0, 0.9), pred({0, 1, 2}, 0, 0.8)};
  const auto rep = evaluate_ap(preds, gts);
  CHECK(std::abs(rep.map - 0.5) < kTol);
  CHECK(std::abs(rep.map50 - 0.5) < kTol);
  CHECK(std::abs(rep.map25 - 0.5) < kTol);
}

TEST_CASE("per-class means average an exact class and a weak class") {
  // Class 0 exact; class 1 overlaps 2/5 = 0.4.
  const std::vector<GroundTruthInstance> gts{gt({0, 1, 2}, 0), gt({10, 11, 12, 13}, 1)};
  const std::vector<EvalPrediction> preds{pred({0, 1, 2}, 0, 0.9), pred({10, 11, 20}, 1, 0.8)};
  const auto rep = evaluate_ap(preds, gts);
  CHECK(std::abs(rep.map25 - 1.0) < kTol);
  CHECK(std::abs(rep.map50 - 0.5) < kTol);
  CHECK(std::abs(rep.map - 0.5) < kTol);
  CHECK(std::abs(rep.per_class_map.at(0) - 1.0) < kTol);
  CHECK(std::abs(rep.per_class_map.at(1) - 0.0) < kTol);
}

TEST_CASE("predictions for classes absent from the GT are ignored") {
  const std::vector<GroundTruthInstance> gts{gt({0, 1, 2}, 0)};
  const std::vector<EvalPrediction> preds{pred({0, 1, 2}, 0, 0.9), pred({5, 6}, 7, 0.95)};
  const auto rep = evaluate_ap(preds, gts);
  CHECK(std::abs(rep.map - 1.0) < kTol);
}

TEST_CASE("a GT class with no predictions scores zero and drags the mean") {
  const std::vector<GroundTruthInstance> gts{gt({0, 1, 2}, 0), gt({5, 6, 7}, 1)};
  const std::vector<EvalPrediction> preds{pred({0, 1, 2}, 0, 0.9)};
  const auto rep = evaluate_ap(preds, gts);
  CHECK(std::abs(rep.map - 0.5) < kTol);
  CHECK(std::abs(rep.per_class_map.at(1) - 0.0) < kTol);
}

TEST_CASE("appending a zero-overlap straggler never changes the AP") {
  const std::vector<GroundTruthInstance> gts{gt({0, 1, 2}, 0), gt({4, 5}, 0)};
  std::vector<EvalPrediction> preds{pred({0, 1, 2}, 0, 0.9), pred({4, 5}, 0, 0.7)};
  const auto before = evaluate_ap(preds, gts);
  preds.push_back(pred({100, 101}, 0, 0.1));  // lowest score, IoU 0 with everything
  const auto after = evaluate_ap(preds, gts);
  CHECK(std::abs(before.map - after.map) < kTol);
  CHECK(std::abs(before.map50 - after.map50) < kTol);
  CHECK(std::abs(before.map25 - after.map25) < kTol);
}

TEST_CASE("greedy matching picks the higher-overlap GT first") {
  // One prediction straddles two GT instances of the same class; it must
  // claim the one it overlaps most, leaving the other unmatched.
  const std::vector<GroundTruthInstance> gts{gt({0, 1, 2, 3}, 0), gt({3, 4}, 0)};
  const std::vector<EvalPrediction> preds{pred({0, 1, 2, 3}, 0, 0.9)};
  std::map<int, double> per_class;
  const double ap50 = mean_ap_at_threshold(preds, gts, 0.5, &per_class);
  // Recall reaches 1/2 with precision 1: AP = 0.5 for the class.
  CHECK(std::abs(ap50 - 0.5) < kTol);
}

TEST_CASE("empty GT point sets are rejected") {
  const std::vector<GroundTruthInstance> gts{gt({}, 0)};
  const std::vector<EvalPrediction> preds{pred({0}, 0, 0.9)};
  CHECK_THROWS_AS(evaluate_ap(preds, gts), ValidationError);
}
