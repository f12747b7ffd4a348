#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oy3d/evalap.hpp"
#include "oy3d/scene_io.hpp"
#include "oy3d/visibility.hpp"

namespace oy3d {

struct SynthObject {
  enum class Shape { Box, Sphere };
  Shape shape = Shape::Box;
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  Eigen::Vector3d size = Eigen::Vector3d::Constant(0.5);  // full extent / diameter
  int class_id = 0;
};

struct SynthConfig {
  std::uint64_t seed = 0;
  std::vector<SynthObject> objects;
  int num_cameras = 8;
  double ring_radius = 3.0;
  double ring_height = 0.0;  // camera height above the scene centroid (y axis)
  int width = 320;
  int height = 240;
  int points_per_object = 1500;
  double detector_noise = 0.0;  // per (frame, object) misclassification probability
  double depth_scale = 1000.0;
  // Depth tolerance used when deciding which points count as visible for
  // ground-truth boxes; keep equal to the pipeline's tau_depth so the
  // closed loop is exact.
  double tau_visibility = 0.10;
  std::vector<std::string> vocabulary;  // defaults to one prompt per class id
};

/// A generated scene plus its ground truth: exact proposals, per-frame
/// tight boxes of each object's visible projection, and the noiseless or
/// noise-corrupted detections derived from them.
struct SynthScene {
  SceneBundle bundle;
  std::vector<GroundTruthInstance> ground_truth;
  // gt_class_of_proposal[j] is the true class of bundle proposal j.
  std::vector<int> gt_class_of_proposal;
  double depth_scale = 1000.0;
};

SynthConfig parse_synth_config(const std::filesystem::path& json_path);

SynthScene generate_scene(const SynthConfig& cfg);

// Emits exactly the scene_io layout; load_scene on the result reproduces
// the bundle bit-exactly, and a fixed seed yields a byte-identical
// directory across runs.
void write_scene(const SynthScene& scene, const std::filesystem::path& root);

}  // namespace oy3d
