#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace oy3d {

struct Rgb8 {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb8&) const = default;
};

/// Homogeneous 3D point cloud, stored 4xN column-major with the fourth
/// coordinate fixed to 1. Colors, when present, are carried along for
/// export only and never enter any computation.
class PointCloud {
 public:
  explicit PointCloud(Eigen::Matrix4Xd points, std::vector<Rgb8> colors = {});

  const Eigen::Matrix4Xd& points() const { return points_; }
  std::size_t size() const { return static_cast<std::size_t>(points_.cols()); }
  bool has_colors() const { return !colors_.empty(); }
  const std::vector<Rgb8>& colors() const { return colors_; }

 private:
  Eigen::Matrix4Xd points_;
  std::vector<Rgb8> colors_;
};

/// One posed camera. `extrinsic` is world-to-camera; `camera_to_world` is
/// the pose as stored on disk and is kept so a written scene round-trips
/// bit-exactly.
struct CameraFrame {
  int frame_id = 0;
  Eigen::Matrix4d intrinsic = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d extrinsic = Eigen::Matrix4d::Identity();
  Eigen::Matrix4d camera_to_world = Eigen::Matrix4d::Identity();
  int width = 0;
  int height = 0;
};

// Throws ValidationError on non-finite entries, non-positive focals,
// a non-orthonormal rotation block, or bad dimensions.
void validate_camera(const CameraFrame& frame);

/// Sensor depth for one frame, meters, row-major. `valid` is false where
/// the sensor reported no measurement.
struct DepthMap {
  int width = 0;
  int height = 0;
  std::vector<float> depth;
  std::vector<std::uint8_t> valid;

  float at(int u, int v) const { return depth[static_cast<std::size_t>(v) * width + u]; }
  bool valid_at(int u, int v) const {
    return valid[static_cast<std::size_t>(v) * width + u] != 0;
  }
};

/// Projection of the whole cloud into one frame. Pixel coordinates carry
/// the perspective division; depth_z is the camera-space z before the
/// division. depth_z <= 0 flags a behind-camera point, whose pixel fields
/// then hold the raw (undivided) numerators.
struct Projection {
  std::vector<double> pixel_x;
  std::vector<double> pixel_y;
  std::vector<double> depth_z;
};

// Projects one frame; the batched entry point below fans this out over
// frames in parallel.
Projection project_frame(const PointCloud& cloud, const CameraFrame& frame);

std::vector<Projection> project_points(const PointCloud& cloud,
                                       const std::vector<CameraFrame>& frames);

// Projects only the listed points; element i of the outputs corresponds to
// indices[i]. Bit-identical to the full projection at the same points.
void project_subset(const PointCloud& cloud, const CameraFrame& frame,
                    const std::vector<std::uint32_t>& indices, std::vector<double>& pixel_x,
                    std::vector<double>& pixel_y, std::vector<double>& depth_z);

// Rigid inverse: camera-to-world -> world-to-camera. Throws ValidationError
// if the input is not a rigid transform.
Eigen::Matrix4d invert_pose(const Eigen::Matrix4d& camera_to_world);

}  // namespace oy3d
