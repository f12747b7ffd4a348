#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "oy3d/error.hpp"
#include "oy3d/scene_io.hpp"
#include "oy3d/synth.hpp"
#include "scene_helpers.hpp"

using namespace oy3d;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("oy3d_synth_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("config validation") {
  SynthConfig cfg;
  CHECK_THROWS_AS(generate_scene(cfg), ValidationError);  // no objects

  cfg.objects.push_back(SynthObject{});
  cfg.num_cameras = 0;
  CHECK_THROWS_AS(generate_scene(cfg), ValidationError);

  cfg.num_cameras = 4;
  cfg.detector_noise = 1.5;
  CHECK_THROWS_AS(generate_scene(cfg), ValidationError);
}

TEST_CASE("same seed, same scene in memory") {
  const auto cfg = testing::random_scene_config(123);
  const auto a = generate_scene(cfg);
  const auto b = generate_scene(cfg);

  CHECK(a.bundle.cloud.points() == b.bundle.cloud.points());
  REQUIRE(a.bundle.frames.size() == b.bundle.frames.size());
  for (std::size_t i = 0; i < a.bundle.frames.size(); ++i) {
    CHECK(a.bundle.frames[i].camera_to_world == b.bundle.frames[i].camera_to_world);
    CHECK(a.bundle.depth_maps[i].depth == b.bundle.depth_maps[i].depth);
    CHECK(a.bundle.depth_maps[i].valid == b.bundle.depth_maps[i].valid);
    REQUIRE(a.bundle.detections[i].size() == b.bundle.detections[i].size());
    for (std::size_t d = 0; d < a.bundle.detections[i].size(); ++d) {
      CHECK(a.bundle.detections[i][d].x1 == b.bundle.detections[i][d].x1);
      CHECK(a.bundle.detections[i][d].class_id == b.bundle.detections[i][d].class_id);
    }
  }
}

TEST_CASE("different seeds move the points") {
  auto cfg = testing::separated_pair_config(1);
  const auto a = generate_scene(cfg);
  cfg.seed = 2;
  const auto b = generate_scene(cfg);
  CHECK(a.bundle.cloud.points() != b.bundle.cloud.points());
}

TEST_CASE("written scenes are byte-identical across runs") {
  const auto cfg = testing::separated_pair_config(7, 0.0, 6, 300);
  TempDir dir("det");
  const fs::path ra = dir.path / "a";
  const fs::path rb = dir.path / "b";
  write_scene(generate_scene(cfg), ra);
  write_scene(generate_scene(cfg), rb);

  std::size_t compared = 0;
  for (const auto& entry : fs::recursive_directory_iterator(ra)) {
    if (!entry.is_regular_file()) continue;
    const fs::path rel = fs::relative(entry.path(), ra);
    CHECK(slurp(entry.path()) == slurp(rb / rel));
    ++compared;
  }
  // points, intrinsic, proposals, prompts, gt + 3 files per frame.
  CHECK(compared == 5 + 3 * 6);
}

TEST_CASE("write_scene then load_scene reproduces the bundle bit-exactly") {
  const auto scene = generate_scene(testing::random_scene_config(55));
  TempDir dir("roundtrip");
  write_scene(scene, dir.path);
  const SceneBundle loaded = load_scene(dir.path, LoadConfig{scene.depth_scale, 1});

  const SceneBundle& b = scene.bundle;
  CHECK(loaded.cloud.points() == b.cloud.points());
  REQUIRE(loaded.frames.size() == b.frames.size());
  for (std::size_t i = 0; i < b.frames.size(); ++i) {
    CHECK(loaded.frames[i].frame_id == b.frames[i].frame_id);
    CHECK(loaded.frames[i].intrinsic == b.frames[i].intrinsic);
    CHECK(loaded.frames[i].camera_to_world == b.frames[i].camera_to_world);
    CHECK(loaded.frames[i].extrinsic == b.frames[i].extrinsic);
    CHECK(loaded.depth_maps[i].depth == b.depth_maps[i].depth);
    CHECK(loaded.depth_maps[i].valid == b.depth_maps[i].valid);
    REQUIRE(loaded.detections[i].size() == b.detections[i].size());
    for (std::size_t d = 0; d < b.detections[i].size(); ++d) {
      CHECK(loaded.detections[i][d].x1 == b.detections[i][d].x1);
      CHECK(loaded.detections[i][d].y1 == b.detections[i][d].y1);
      CHECK(loaded.detections[i][d].x2 == b.detections[i][d].x2);
      CHECK(loaded.detections[i][d].y2 == b.detections[i][d].y2);
      CHECK(loaded.detections[i][d].class_id == b.detections[i][d].class_id);
      CHECK(loaded.detections[i][d].score == b.detections[i][d].score);
    }
  }
  REQUIRE(loaded.proposals.size() == b.proposals.size());
  for (std::size_t j = 0; j < b.proposals.size(); ++j) {
    CHECK(loaded.proposals.mask(j) == b.proposals.mask(j));
    CHECK(loaded.proposals.confidence(j) == b.proposals.confidence(j));
  }
  CHECK(loaded.vocabulary.prompts == b.vocabulary.prompts);
}

TEST_CASE("synth config parses from JSON") {
  TempDir dir("cfg");
  {
    std::ofstream out(dir.path / "cfg.json");
    out << R"({
      "seed": 42,
      "objects": [
        {"shape": "box", "center": [0, 0.6, 0], "size": [0.4, 0.3, 0.4], "class_id": 0},
        {"shape": "sphere", "center": [0, -0.6, 0], "size": 0.5, "class_id": 1}
      ],
      "cameras": {"count": 6, "ring_radius": 2.5, "ring_height": 0.1},
      "resolution": [160, 120],
      "points_per_object": 250,
      "detector_noise": 0.2,
      "vocabulary": ["mug", "ball", "extra"]
    })";
  }
  const SynthConfig cfg = parse_synth_config(dir.path / "cfg.json");
  CHECK(cfg.seed == 42);
  REQUIRE(cfg.objects.size() == 2);
  CHECK(cfg.objects[0].shape == SynthObject::Shape::Box);
  CHECK(cfg.objects[1].shape == SynthObject::Shape::Sphere);
  CHECK(cfg.objects[1].size.x() == 0.5);
  CHECK(cfg.objects[0].center.y() == 0.6);
  CHECK(cfg.num_cameras == 6);
  CHECK(cfg.ring_radius == 2.5);
  CHECK(cfg.width == 160);
  CHECK(cfg.height == 120);
  CHECK(cfg.points_per_object == 250);
  CHECK(cfg.detector_noise == 0.2);
  CHECK(cfg.vocabulary.size() == 3);

  {
    std::ofstream out(dir.path / "bad.json");
    out << R"({"objects": [{"shape": "cone", "center": [0,0,0], "size": 1, "class_id": 0}]})";
  }
  CHECK_THROWS_AS(parse_synth_config(dir.path / "bad.json"), ValidationError);
}

TEST_CASE("ground-truth boxes cover every pipeline-visible point") {
  const auto scene = generate_scene(testing::random_scene_config(200));
  const auto& b = scene.bundle;
  const auto pv = oracle_point_visibility(b.cloud, b.frames, b.depth_maps, {0.10, true});
  const auto projections = project_points(b.cloud, b.frames);

  for (std::size_t i = 0; i < b.frames.size(); ++i) {
    for (std::size_t k = 0; k < b.proposals.size(); ++k) {
      // The detection for object k in frame i, if the object is visible
      // there. Noiseless scenes keep per-object detection order.
      const Detection2D* det = nullptr;
      for (const auto& d : b.detections[i])
        // The class id identifies the object: random_scene_config assigns
        // distinct classes and the scene is noiseless.
        if (d.class_id == scene.gt_class_of_proposal[k]) det = &d;
      for (std::uint32_t p : b.proposals.mask(k)) {
        if (!pv.visible(i, p)) continue;
        REQUIRE(det != nullptr);
        const long u = std::lround(projections[i].pixel_x[p]);
        const long v = std::lround(projections[i].pixel_y[p]);
        CHECK(u >= std::lround(det->x1));
        CHECK(u < std::lround(det->x2));
        CHECK(v >= std::lround(det->y1));
        CHECK(v < std::lround(det->y2));
      }
    }
  }
}

TEST_CASE("full detector noise always flips the class") {
  const auto scene = generate_scene(testing::separated_pair_config(4, 1.0, 8, 300));
  for (std::size_t i = 0; i < scene.bundle.detections.size(); ++i) {
    // With two vertically separated objects the detection list per frame
    // holds object 0 then object 1; noise must have flipped both.
    const auto& dets = scene.bundle.detections[i];
    REQUIRE(dets.size() == 2);
    CHECK(dets[0].class_id == 1);
    CHECK(dets[1].class_id == 0);
  }
}

TEST_CASE("proposals partition the cloud into contiguous ranges") {
  const auto scene = generate_scene(testing::separated_pair_config(8, 0.0, 4, 100));
  const auto& props = scene.bundle.proposals;
  REQUIRE(props.size() == 2);
  CHECK(props.num_points() == 200);
  for (std::size_t j = 0; j < props.size(); ++j) {
    const auto& mask = props.mask(j);
    REQUIRE(mask.size() == 100);
    for (std::size_t i = 0; i < mask.size(); ++i)
      CHECK(mask[i] == static_cast<std::uint32_t>(j * 100 + i));
    CHECK(scene.ground_truth[j].point_indices == mask);
    CHECK(scene.ground_truth[j].class_id == scene.gt_class_of_proposal[j]);
  }
}
