#include "oy3d/geometry.hpp"

#include <cmath>
#include <string>

#include "oy3d/error.hpp"
#include "oy3d/parallel.hpp"

namespace oy3d {

namespace {

// Shared scalar kernel so the batched path, the subset path and the
// brute-force oracle all evaluate the exact same floating-point sequence.
inline void project_point(const Eigen::Matrix4d& proj, const double* p, double& px, double& py,
                          double& z) {
  double q[3];
  for (int r = 0; r < 3; ++r) {
    double acc = 0.0;
    for (int c = 0; c < 4; ++c) acc += proj(r, c) * p[c];
    q[r] = acc;
  }
  z = q[2];
  if (z > 0.0) {
    px = q[0] / z;
    py = q[1] / z;
  } else {
    px = q[0];
    py = q[1];
  }
}

bool rotation_orthonormal(const Eigen::Matrix3d& r, double tol) {
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < tol;
}

}  // namespace

PointCloud::PointCloud(Eigen::Matrix4Xd points, std::vector<Rgb8> colors)
    : points_(std::move(points)), colors_(std::move(colors)) {
  if (points_.cols() < 1) throw ValidationError("point cloud is empty");
  if (!points_.allFinite()) throw ValidationError("point cloud has non-finite coordinates");
  for (Eigen::Index i = 0; i < points_.cols(); ++i) {
    if (points_(3, i) != 1.0)
      throw ValidationError("point " + std::to_string(i) + " has homogeneous coordinate != 1");
  }
  if (!colors_.empty() && colors_.size() != static_cast<std::size_t>(points_.cols()))
    throw ValidationError("color count does not match point count");
}

void validate_camera(const CameraFrame& frame) {
  const std::string tag = "frame " + std::to_string(frame.frame_id) + ": ";
  if (!frame.intrinsic.allFinite() || !frame.extrinsic.allFinite())
    throw ValidationError(tag + "invalid camera, non-finite matrix entry");
  if (frame.intrinsic(0, 0) <= 0.0 || frame.intrinsic(1, 1) <= 0.0)
    throw ValidationError(tag + "invalid camera, non-positive focal length");
  if (!rotation_orthonormal(frame.extrinsic.topLeftCorner<3, 3>(), 1e-6))
    throw ValidationError(tag + "invalid camera, extrinsic rotation not orthonormal");
  if (frame.width <= 0 || frame.height <= 0)
    throw ValidationError(tag + "invalid camera, non-positive image size");
}

Projection project_frame(const PointCloud& cloud, const CameraFrame& frame) {
  if (!frame.intrinsic.allFinite() || !frame.extrinsic.allFinite())
    throw ValidationError("frame " + std::to_string(frame.frame_id) +
                          ": invalid camera, non-finite matrix entry");
  const Eigen::Matrix4d proj = frame.intrinsic * frame.extrinsic;
  const std::size_t n = cloud.size();
  Projection out;
  out.pixel_x.resize(n);
  out.pixel_y.resize(n);
  out.depth_z.resize(n);
  const double* data = cloud.points().data();
  for (std::size_t i = 0; i < n; ++i)
    project_point(proj, data + 4 * i, out.pixel_x[i], out.pixel_y[i], out.depth_z[i]);
  return out;
}

std::vector<Projection> project_points(const PointCloud& cloud,
                                       const std::vector<CameraFrame>& frames) {
  if (frames.empty()) throw ValidationError("no frames to project onto");
  for (const auto& f : frames)
    if (!f.intrinsic.allFinite() || !f.extrinsic.allFinite())
      throw ValidationError("frame " + std::to_string(f.frame_id) +
                            ": invalid camera, non-finite matrix entry");
  std::vector<Projection> out(frames.size());
  parallel_for(frames.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) out[i] = project_frame(cloud, frames[i]);
  });
  return out;
}

void project_subset(const PointCloud& cloud, const CameraFrame& frame,
                    const std::vector<std::uint32_t>& indices, std::vector<double>& pixel_x,
                    std::vector<double>& pixel_y, std::vector<double>& depth_z) {
  const Eigen::Matrix4d proj = frame.intrinsic * frame.extrinsic;
  pixel_x.resize(indices.size());
  pixel_y.resize(indices.size());
  depth_z.resize(indices.size());
  const double* data = cloud.points().data();
  for (std::size_t i = 0; i < indices.size(); ++i)
    project_point(proj, data + 4 * static_cast<std::size_t>(indices[i]), pixel_x[i], pixel_y[i],
                  depth_z[i]);
}

Eigen::Matrix4d invert_pose(const Eigen::Matrix4d& camera_to_world) {
  if (!camera_to_world.allFinite()) throw ValidationError("invalid pose, non-finite entry");
  const Eigen::Matrix3d r = camera_to_world.topLeftCorner<3, 3>();
  if (!rotation_orthonormal(r, 1e-6))
    throw ValidationError("invalid pose, rotation block not orthonormal");
  const Eigen::RowVector4d bottom = camera_to_world.row(3);
  if (bottom != Eigen::RowVector4d(0, 0, 0, 1))
    throw ValidationError("invalid pose, bottom row is not (0,0,0,1)");
  Eigen::Matrix4d inv = Eigen::Matrix4d::Identity();
  inv.topLeftCorner<3, 3>() = r.transpose();
  inv.topRightCorner<3, 1>() = -(r.transpose() * camera_to_world.topRightCorner<3, 1>());
  return inv;
}

}  // namespace oy3d
