#include <doctest.h>

#include <random>

#include "oy3d/error.hpp"
#include "oy3d/geometry.hpp"

using namespace oy3d;

namespace {

PointCloud make_cloud(std::initializer_list<Eigen::Vector3d> pts) {
  Eigen::Matrix4Xd m(4, static_cast<Eigen::Index>(pts.size()));
  Eigen::Index i = 0;
  for (const auto& p : pts) m.col(i++) << p.x(), p.y(), p.z(), 1.0;
  return PointCloud(std::move(m));
}

Eigen::Matrix4d random_rigid(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  const Eigen::Quaterniond q =
      Eigen::Quaterniond(uni(rng), uni(rng), uni(rng), uni(rng)).normalized();
  Eigen::Matrix4d t = Eigen::Matrix4d::Identity();
  t.topLeftCorner<3, 3>() = q.toRotationMatrix();
  t.topRightCorner<3, 1>() = Eigen::Vector3d(uni(rng), uni(rng), uni(rng)) * 5.0;
  return t;
}

}  // namespace

TEST_CASE("point cloud validation") {
  CHECK_THROWS_AS(PointCloud(Eigen::Matrix4Xd(4, 0)), ValidationError);

  Eigen::Matrix4Xd bad_w(4, 1);
  bad_w << 1, 2, 3, 2;
  CHECK_THROWS_AS(PointCloud(std::move(bad_w)), ValidationError);

  Eigen::Matrix4Xd nan(4, 1);
  nan << std::nan(""), 0, 0, 1;
  CHECK_THROWS_AS(PointCloud(std::move(nan)), ValidationError);
}

TEST_CASE("identity camera projects plainly") {
  const auto cloud = make_cloud({{0.5, 0.25, 1.0}});
  CameraFrame frame;
  frame.width = 640;
  frame.height = 480;
  const auto projs = project_points(cloud, {frame});
  REQUIRE(projs.size() == 1);
  CHECK(projs[0].pixel_x[0] == doctest::Approx(0.5));
  CHECK(projs[0].pixel_y[0] == doctest::Approx(0.25));
  CHECK(projs[0].depth_z[0] == doctest::Approx(1.0));
}

TEST_CASE("pinhole intrinsic with perspective divide") {
  // focal 100, principal point (50,50), point (1,0,2):
  // x' = (100*1 + 50*2)/2 = 100, y' = (0 + 50*2)/2 = 50.
  const auto cloud = make_cloud({{1.0, 0.0, 2.0}});
  CameraFrame frame;
  frame.intrinsic(0, 0) = 100;
  frame.intrinsic(1, 1) = 100;
  frame.intrinsic(0, 2) = 50;
  frame.intrinsic(1, 2) = 50;
  frame.width = 200;
  frame.height = 200;
  const auto projs = project_points(cloud, {frame});
  CHECK(projs[0].pixel_x[0] == doctest::Approx(100.0));
  CHECK(projs[0].pixel_y[0] == doctest::Approx(50.0));
  CHECK(projs[0].depth_z[0] == doctest::Approx(2.0));
}

TEST_CASE("behind-camera point is flagged by non-positive depth") {
  const auto cloud = make_cloud({{0.0, 0.0, -1.0}});
  CameraFrame frame;
  frame.width = 100;
  frame.height = 100;
  const auto projs = project_points(cloud, {frame});
  CHECK(projs[0].depth_z[0] == -1.0);
}

TEST_CASE("non-finite camera matrix names the frame") {
  const auto cloud = make_cloud({{0, 0, 1}});
  CameraFrame frame;
  frame.frame_id = 7;
  frame.intrinsic(0, 0) = std::numeric_limits<double>::infinity();
  frame.width = 10;
  frame.height = 10;
  try {
    project_points(cloud, {frame});
    FAIL("expected ValidationError");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("frame 7") != std::string::npos);
  }
}

TEST_CASE("invert_pose basics") {
  CHECK(invert_pose(Eigen::Matrix4d::Identity()) == Eigen::Matrix4d::Identity());

  Eigen::Matrix4d trans = Eigen::Matrix4d::Identity();
  trans(2, 3) = 3.0;
  const Eigen::Matrix4d inv = invert_pose(trans);
  CHECK(inv(2, 3) == -3.0);

  Eigen::Matrix4d scaled = Eigen::Matrix4d::Identity() * 2.0;
  scaled(3, 3) = 1.0;
  CHECK_THROWS_AS(invert_pose(scaled), ValidationError);
}

TEST_CASE("invert_pose round trips over random rigid transforms") {
  std::mt19937_64 rng(1234);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Matrix4d t = random_rigid(rng);
    const Eigen::Matrix4d inv = invert_pose(t);
    CHECK((inv * t - Eigen::Matrix4d::Identity()).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((invert_pose(inv) - t).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("batched projection equals per-frame projection") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> uni(-2.0, 2.0);
  Eigen::Matrix4Xd pts(4, 50);
  for (int i = 0; i < 50; ++i) pts.col(i) << uni(rng), uni(rng), uni(rng) + 4.0, 1.0;
  const PointCloud cloud(std::move(pts));

  std::vector<CameraFrame> frames;
  for (int f = 0; f < 5; ++f) {
    CameraFrame frame;
    frame.frame_id = f;
    frame.extrinsic = invert_pose(random_rigid(rng));
    frame.camera_to_world = invert_pose(frame.extrinsic);
    frame.intrinsic(0, 0) = frame.intrinsic(1, 1) = 80.0;
    frame.intrinsic(0, 2) = 40.0;
    frame.intrinsic(1, 2) = 30.0;
    frame.width = 80;
    frame.height = 60;
    frames.push_back(frame);
  }
  const auto batched = project_points(cloud, frames);
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const Projection single = project_frame(cloud, frames[f]);
    for (std::size_t p = 0; p < cloud.size(); ++p) {
      CHECK(batched[f].pixel_x[p] == single.pixel_x[p]);
      CHECK(batched[f].pixel_y[p] == single.pixel_y[p]);
      CHECK(batched[f].depth_z[p] == single.depth_z[p]);
    }
  }
}

TEST_CASE("depth equals camera-space z under identity intrinsics") {
  std::mt19937_64 rng(7);
  const Eigen::Matrix4d pose = random_rigid(rng);
  CameraFrame frame;
  frame.extrinsic = invert_pose(pose);
  frame.width = 100;
  frame.height = 100;
  const auto cloud = make_cloud({{0.3, -0.2, 5.0}, {1.0, 2.0, 3.0}});
  const Projection proj = project_frame(cloud, frame);
  for (std::size_t p = 0; p < cloud.size(); ++p) {
    const Eigen::Vector4d cam = frame.extrinsic * cloud.points().col(p);
    CHECK(proj.depth_z[p] == doctest::Approx(cam.z()).epsilon(1e-12));
  }
}

TEST_CASE("project_subset matches full projection bit-exactly") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  Eigen::Matrix4Xd pts(4, 30);
  for (int i = 0; i < 30; ++i) pts.col(i) << uni(rng), uni(rng), uni(rng) + 3.0, 1.0;
  const PointCloud cloud(std::move(pts));
  CameraFrame frame;
  frame.extrinsic = invert_pose(random_rigid(rng));
  frame.intrinsic(0, 0) = frame.intrinsic(1, 1) = 50.0;
  frame.width = frame.height = 64;

  const Projection full = project_frame(cloud, frame);
  const std::vector<std::uint32_t> indices{2, 7, 11, 29};
  std::vector<double> px, py, pz;
  project_subset(cloud, frame, indices, px, py, pz);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    CHECK(px[i] == full.pixel_x[indices[i]]);
    CHECK(py[i] == full.pixel_y[indices[i]]);
    CHECK(pz[i] == full.depth_z[indices[i]]);
  }
}
