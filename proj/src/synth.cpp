#include "oy3d/synth.hpp"

#include <cmath>
#include <fstream>
#include <json.hpp>
#include <numbers>
#include <random>
#include <string>

#include "oy3d/error.hpp"
#include "oy3d/ply_io.hpp"
#include "oy3d/png_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace oy3d {

namespace {

void validate_config(const SynthConfig& cfg) {
  if (cfg.objects.empty()) throw ValidationError("synth config needs at least one object");
  if (cfg.width < 16 || cfg.height < 16)
    throw ValidationError("synth resolution must be at least 16x16");
  if (cfg.num_cameras < 1) throw ValidationError("synth config needs at least one camera");
  if (!(cfg.detector_noise >= 0.0 && cfg.detector_noise <= 1.0))
    throw ValidationError("detector noise must be in [0,1]");
  if (cfg.points_per_object < 1) throw ValidationError("points_per_object must be >= 1");
  if (!(cfg.ring_radius > 0.0)) throw ValidationError("ring radius must be positive");
  if (!(cfg.tau_visibility > 0.0)) throw ValidationError("tau_visibility must be positive");
  for (const auto& obj : cfg.objects)
    if (obj.class_id < 0) throw ValidationError("object class_id must be non-negative");
}

Eigen::Vector3d sample_box_surface(const SynthObject& obj, std::mt19937_64& rng) {
  const Eigen::Vector3d h = obj.size / 2.0;
  const double areas[3] = {obj.size.y() * obj.size.z(), obj.size.x() * obj.size.z(),
                           obj.size.x() * obj.size.y()};
  const double total = 2.0 * (areas[0] + areas[1] + areas[2]);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  double pick = uni(rng) * total;
  int axis = 0;
  double sign = 1.0;
  for (int a = 0; a < 3; ++a) {
    for (double s : {-1.0, 1.0}) {
      if (pick < areas[a]) {
        axis = a;
        sign = s;
        goto picked;
      }
      pick -= areas[a];
    }
  }
picked:
  Eigen::Vector3d p;
  p[axis] = sign * h[axis];
  const int u_axis = (axis + 1) % 3;
  const int v_axis = (axis + 2) % 3;
  p[u_axis] = (uni(rng) * 2.0 - 1.0) * h[u_axis];
  p[v_axis] = (uni(rng) * 2.0 - 1.0) * h[v_axis];
  return obj.center + p;
}

Eigen::Vector3d sample_sphere_surface(const SynthObject& obj, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const double cos_theta = uni(rng) * 2.0 - 1.0;
  const double phi = uni(rng) * 2.0 * std::numbers::pi;
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - cos_theta * cos_theta));
  const Eigen::Vector3d dir(sin_theta * std::cos(phi), sin_theta * std::sin(phi), cos_theta);
  return obj.center + dir * (obj.size.x() / 2.0);
}

CameraFrame make_ring_camera(int frame_id, const SynthConfig& cfg,
                             const Eigen::Vector3d& centroid) {
  const double theta = 2.0 * std::numbers::pi * frame_id / cfg.num_cameras;
  const Eigen::Vector3d pos = centroid + Eigen::Vector3d(cfg.ring_radius * std::cos(theta),
                                                         cfg.ring_height,
                                                         cfg.ring_radius * std::sin(theta));
  Eigen::Vector3d forward = centroid - pos;
  if (forward.norm() < 1e-9) throw ValidationError("camera placed on the scene centroid");
  forward.normalize();
  Eigen::Vector3d up(0, 1, 0);
  if (up.cross(forward).norm() < 1e-9) up = Eigen::Vector3d(1, 0, 0);
  // CV convention: x right, y down, z forward.
  const Eigen::Vector3d x = up.cross(forward).normalized();
  const Eigen::Vector3d y = forward.cross(x);

  CameraFrame frame;
  frame.frame_id = frame_id;
  frame.width = cfg.width;
  frame.height = cfg.height;
  frame.camera_to_world = Eigen::Matrix4d::Identity();
  frame.camera_to_world.block<3, 1>(0, 0) = x;
  frame.camera_to_world.block<3, 1>(0, 1) = y;
  frame.camera_to_world.block<3, 1>(0, 2) = forward;
  frame.camera_to_world.block<3, 1>(0, 3) = pos;
  frame.extrinsic = invert_pose(frame.camera_to_world);
  const double focal = static_cast<double>(cfg.width);
  frame.intrinsic = Eigen::Matrix4d::Identity();
  frame.intrinsic(0, 0) = focal;
  frame.intrinsic(1, 1) = focal;
  frame.intrinsic(0, 2) = cfg.width / 2.0;
  frame.intrinsic(1, 2) = cfg.height / 2.0;
  return frame;
}

DepthMap render_depth(const Projection& proj, const SynthConfig& cfg) {
  const std::size_t area = static_cast<std::size_t>(cfg.width) * cfg.height;
  std::vector<double> zbuf(area, std::numeric_limits<double>::infinity());
  const std::size_t n = proj.depth_z.size();
  for (std::size_t p = 0; p < n; ++p) {
    const double z = proj.depth_z[p];
    if (!(z > 0.0)) continue;
    const long u0 = std::lround(proj.pixel_x[p]);
    const long v0 = std::lround(proj.pixel_y[p]);
    // Nearest-pixel splat, radius 1, min-z buffer.
    for (long dv = -1; dv <= 1; ++dv)
      for (long du = -1; du <= 1; ++du) {
        const long u = u0 + du;
        const long v = v0 + dv;
        if (u < 0 || u >= cfg.width || v < 0 || v >= cfg.height) continue;
        double& cell = zbuf[static_cast<std::size_t>(v) * cfg.width + u];
        cell = std::min(cell, z);
      }
  }
  DepthMap dm;
  dm.width = cfg.width;
  dm.height = cfg.height;
  dm.depth.assign(area, 0.0f);
  dm.valid.assign(area, 0);
  for (std::size_t i = 0; i < area; ++i) {
    if (!std::isfinite(zbuf[i])) continue;
    // Quantize exactly as the 16-bit PNG round trip does.
    const long q = std::lround(zbuf[i] * cfg.depth_scale);
    if (q < 1 || q > 65535) continue;
    dm.depth[i] = static_cast<float>(q / cfg.depth_scale);
    dm.valid[i] = 1;
  }
  return dm;
}

SynthObject::Shape parse_shape(const std::string& s) {
  if (s == "box") return SynthObject::Shape::Box;
  if (s == "sphere") return SynthObject::Shape::Sphere;
  throw ValidationError("unknown object shape: " + s);
}

}  // namespace

SynthConfig parse_synth_config(const fs::path& json_path) {
  std::ifstream in(json_path);
  if (!in) throw IoError("cannot open synth config " + json_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed synth config: " + std::string(e.what()));
  }
  if (!j.is_object()) throw ValidationError("synth config must be a JSON object");
  SynthConfig cfg;
  try {
    cfg.seed = j.value("seed", 0ull);
    for (const auto& o : j.at("objects")) {
      SynthObject obj;
      obj.shape = parse_shape(o.value("shape", "box"));
      const auto& c = o.at("center");
      obj.center = Eigen::Vector3d(c.at(0).get<double>(), c.at(1).get<double>(),
                                   c.at(2).get<double>());
      const auto& s = o.at("size");
      if (s.is_array())
        obj.size = Eigen::Vector3d(s.at(0).get<double>(), s.at(1).get<double>(),
                                   s.at(2).get<double>());
      else
        obj.size = Eigen::Vector3d::Constant(s.get<double>());
      obj.class_id = o.at("class_id").get<int>();
      cfg.objects.push_back(obj);
    }
    if (j.contains("cameras")) {
      const auto& cam = j["cameras"];
      cfg.num_cameras = cam.value("count", cfg.num_cameras);
      cfg.ring_radius = cam.value("ring_radius", cfg.ring_radius);
      cfg.ring_height = cam.value("ring_height", cfg.ring_height);
    }
    if (j.contains("resolution")) {
      cfg.width = j["resolution"].at(0).get<int>();
      cfg.height = j["resolution"].at(1).get<int>();
    }
    cfg.points_per_object = j.value("points_per_object", cfg.points_per_object);
    cfg.detector_noise = j.value("detector_noise", cfg.detector_noise);
    cfg.tau_visibility = j.value("tau_visibility", cfg.tau_visibility);
    if (j.contains("vocabulary")) cfg.vocabulary = j["vocabulary"].get<std::vector<std::string>>();
  } catch (const json::exception& e) {
    throw ValidationError("invalid synth config: " + std::string(e.what()));
  }
  validate_config(cfg);
  return cfg;
}

SynthScene generate_scene(const SynthConfig& cfg) {
  validate_config(cfg);
  std::mt19937_64 rng(cfg.seed);

  int num_classes = 0;
  for (const auto& obj : cfg.objects) num_classes = std::max(num_classes, obj.class_id + 1);
  PromptVocabulary vocab;
  if (cfg.vocabulary.empty()) {
    for (int c = 0; c < num_classes; ++c) vocab.prompts.push_back("class " + std::to_string(c));
  } else {
    vocab.prompts = cfg.vocabulary;
    if (static_cast<int>(vocab.prompts.size()) < num_classes)
      throw ValidationError("vocabulary smaller than the largest object class id");
  }
  validate_vocabulary(vocab);

  // Surface-sampled points; each object owns a contiguous index range.
  const std::size_t n = cfg.objects.size() * static_cast<std::size_t>(cfg.points_per_object);
  Eigen::Matrix4Xd points(4, static_cast<Eigen::Index>(n));
  std::vector<GroundTruthInstance> gts;
  std::vector<std::vector<std::uint32_t>> masks;
  std::vector<double> confs;
  std::size_t next = 0;
  for (std::size_t k = 0; k < cfg.objects.size(); ++k) {
    const SynthObject& obj = cfg.objects[k];
    GroundTruthInstance gt;
    gt.class_id = obj.class_id;
    for (int i = 0; i < cfg.points_per_object; ++i) {
      const Eigen::Vector3d p = obj.shape == SynthObject::Shape::Box
                                    ? sample_box_surface(obj, rng)
                                    : sample_sphere_surface(obj, rng);
      points.col(static_cast<Eigen::Index>(next)) << p.x(), p.y(), p.z(), 1.0;
      gt.point_indices.push_back(static_cast<std::uint32_t>(next));
      ++next;
    }
    masks.push_back(gt.point_indices);
    confs.push_back(static_cast<double>(static_cast<float>(0.95 - 0.01 * static_cast<double>(k))));
    gts.push_back(std::move(gt));
  }
  PointCloud cloud(std::move(points));

  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
  for (const auto& obj : cfg.objects) centroid += obj.center;
  centroid /= static_cast<double>(cfg.objects.size());

  std::vector<CameraFrame> frames;
  std::vector<Projection> projections;
  std::vector<DepthMap> depth_maps;
  for (int i = 0; i < cfg.num_cameras; ++i) {
    CameraFrame frame = make_ring_camera(i, cfg, centroid);
    Projection proj = project_frame(cloud, frame);
    depth_maps.push_back(render_depth(proj, cfg));
    projections.push_back(std::move(proj));
    frames.push_back(std::move(frame));
  }

  // Visible = the pipeline's own per-point predicate, so GT boxes bound
  // exactly the points the pipeline will later gather votes from.
  VisibilityConfig vis_cfg{cfg.tau_visibility, true};
  const PointVisibility pv = oracle_point_visibility(cloud, frames, depth_maps, vis_cfg);

  std::vector<std::vector<Detection2D>> detections(frames.size());
  std::vector<bool> object_seen(cfg.objects.size(), false);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    for (std::size_t k = 0; k < cfg.objects.size(); ++k) {
      bool any = false;
      long min_u = 0, min_v = 0, max_u = 0, max_v = 0;
      for (std::uint32_t p : masks[k]) {
        if (!pv.visible(i, p)) continue;
        const Projection& proj = projections[i];
        const long u = std::lround(proj.pixel_x[p]);
        const long v = std::lround(proj.pixel_y[p]);
        if (!any) {
          min_u = max_u = u;
          min_v = max_v = v;
          any = true;
        } else {
          min_u = std::min(min_u, u);
          max_u = std::max(max_u, u);
          min_v = std::min(min_v, v);
          max_v = std::max(max_v, v);
        }
      }
      if (!any) continue;
      object_seen[k] = true;
      Detection2D det;
      // +1 closes the half-open raster over the extreme pixel.
      det.x1 = static_cast<double>(min_u);
      det.y1 = static_cast<double>(min_v);
      det.x2 = static_cast<double>(max_u + 1);
      det.y2 = static_cast<double>(max_v + 1);
      det.class_id = cfg.objects[k].class_id;
      det.score = 1.0;
      if (cfg.detector_noise > 0.0 && uni(rng) < cfg.detector_noise &&
          vocab.prompts.size() > 1) {
        long wrong = static_cast<long>(uni(rng) * (static_cast<double>(vocab.size()) - 1.0));
        wrong = std::min<long>(wrong, static_cast<long>(vocab.size()) - 2);
        if (wrong >= det.class_id) ++wrong;
        det.class_id = static_cast<int>(wrong);
      }
      detections[i].push_back(clamp_detection(det, cfg.width, cfg.height, vocab.size()));
    }
  }
  for (std::size_t k = 0; k < cfg.objects.size(); ++k)
    if (!object_seen[k])
      throw ValidationError("object " + std::to_string(k) + " is not visible from any camera");

  ProposalSet proposals(std::move(masks), std::move(confs), cloud.size());
  SynthScene scene{SceneBundle{std::move(cloud), std::move(frames), std::move(depth_maps),
                               std::move(detections), std::move(proposals), std::move(vocab)},
                   std::move(gts),
                   {},
                   cfg.depth_scale};
  for (const auto& obj : cfg.objects) scene.gt_class_of_proposal.push_back(obj.class_id);
  return scene;
}

void write_scene(const SynthScene& scene, const fs::path& root) {
  std::error_code ec;
  fs::create_directories(root / "pose", ec);
  fs::create_directories(root / "depth", ec);
  fs::create_directories(root / "detections", ec);
  if (ec) throw IoError("cannot create scene directory " + root.string());

  const SceneBundle& b = scene.bundle;
  write_ply(b.cloud, root / "points.ply");
  write_matrix4_txt(b.frames.at(0).intrinsic, root / "intrinsic.txt");
  for (std::size_t i = 0; i < b.frames.size(); ++i) {
    const std::string name = std::to_string(b.frames[i].frame_id);
    write_matrix4_txt(b.frames[i].camera_to_world, root / "pose" / (name + ".txt"));
    write_depth_png(b.depth_maps[i], root / "depth" / (name + ".png"), scene.depth_scale);
    save_frame_detections(b.detections[i], root / "detections" / (name + ".json"));
  }
  save_proposals_oy3d(b.proposals, root / "proposals.oy3d");
  save_vocabulary(b.vocabulary, root / "prompts.json");

  // Ground truth rides along for the eval subcommand.
  nlohmann::json gt;
  gt["num_points"] = b.cloud.size();
  gt["instances"] = nlohmann::json::array();
  for (const auto& inst : scene.ground_truth)
    gt["instances"].push_back(
        nlohmann::json{{"class_id", inst.class_id}, {"points", inst.point_indices}});
  std::ofstream out(root / "gt.json");
  if (!out) throw IoError("cannot write " + (root / "gt.json").string());
  out << gt.dump(2) << '\n';
}

}  // namespace oy3d
