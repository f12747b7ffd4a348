#pragma once

#include <filesystem>
#include <vector>

#include "oy3d/geometry.hpp"
#include "oy3d/labelmap.hpp"
#include "oy3d/scoring.hpp"
#include "oy3d/visibility.hpp"

namespace oy3d {

/// Fully validated scene: the unit of processing. Frame-indexed lists
/// (frames, depth_maps, detections) are index-aligned.
struct SceneBundle {
  PointCloud cloud;
  std::vector<CameraFrame> frames;
  std::vector<DepthMap> depth_maps;
  std::vector<std::vector<Detection2D>> detections;
  ProposalSet proposals;
  PromptVocabulary vocabulary;
};

struct LoadConfig {
  double depth_scale = 1000.0;
  int frame_stride = 1;
};

// Scene directory layout:
//   points.ply | points.bin     cloud (bin: u32 N, then N x 3 f64 LE)
//   intrinsic.txt               4x4 row-major text, shared by all frames
//   pose/<id>.txt               4x4 camera-to-world, row-major text
//   depth/<id>.png              16-bit grayscale, value/depth_scale meters
//   detections/<id>.json        2D detector output per frame
//   detections/<id>.masks       optional RLE pixel masks (HG mode)
//   proposals.oy3d | proposals.json
//   prompts.json                ordered prompt strings
SceneBundle load_scene(const std::filesystem::path& root, const LoadConfig& cfg = {});

Eigen::Matrix4d read_matrix4_txt(const std::filesystem::path& path);
void write_matrix4_txt(const Eigen::Matrix4d& m, const std::filesystem::path& path);

std::vector<Detection2D> load_frame_detections(const std::filesystem::path& json_path, int width,
                                               int height, std::size_t vocab_size);
void save_frame_detections(const std::vector<Detection2D>& dets,
                           const std::filesystem::path& json_path);

// Binary sparse proposal container: magic "OY3D", version u16, K u32,
// then per mask confidence f32, count u32 and count u32 indices, all LE.
ProposalSet load_proposals(const std::filesystem::path& path, std::size_t num_points);
void save_proposals_oy3d(const ProposalSet& props, const std::filesystem::path& path);
void save_proposals_json(const ProposalSet& props, const std::filesystem::path& path);

PromptVocabulary load_vocabulary(const std::filesystem::path& path);
void save_vocabulary(const PromptVocabulary& vocab, const std::filesystem::path& path);

void save_predictions(const std::vector<InstancePrediction>& instances,
                      const std::vector<InstancePrediction>& unlabeled, bool keep_unlabeled,
                      const std::filesystem::path& out_path);

// Writes a PLY with one color per predicted instance class and a neutral
// color for points not covered by any labeled instance.
void export_labeled_cloud(const PointCloud& cloud,
                          const std::vector<InstancePrediction>& instances,
                          const ProposalSet& props, const std::filesystem::path& out_path);

}  // namespace oy3d
