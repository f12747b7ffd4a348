#include "oy3d/scene_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "oy3d/error.hpp"
#include "oy3d/ply_io.hpp"
#include "oy3d/png_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace oy3d {

namespace {

constexpr char kProposalMagic[4] = {'O', 'Y', '3', 'D'};
constexpr std::uint16_t kProposalVersion = 1;
constexpr char kMaskMagic[4] = {'O', 'Y', 'R', 'M'};

template <typename T>
void write_le(std::ofstream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_le(std::ifstream& in, const std::string& context) {
  T value{};
  if (!in.read(reinterpret_cast<char*>(&value), sizeof(T)))
    throw ValidationError("truncated file while reading " + context);
  return value;
}

json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + path.string() + ": " + e.what());
  }
  return j;
}

void dump_json_file(const json& j, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

PointCloud load_points_bin(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  const auto n = read_le<std::uint32_t>(in, path.string());
  if (n == 0) throw ValidationError("empty point cloud in " + path.string());
  Eigen::Matrix4Xd points(4, n);
  for (std::uint32_t i = 0; i < n; ++i) {
    double xyz[3];
    if (!in.read(reinterpret_cast<char*>(xyz), sizeof(xyz)))
      throw ValidationError("truncated point data in " + path.string());
    points.col(i) << xyz[0], xyz[1], xyz[2], 1.0;
  }
  return PointCloud(std::move(points));
}

// Per-detection RLE masks: magic "OYRM", version u16, count u32, then per
// detection u8 has_mask and, when set, u32 width/height/nruns followed by
// nruns u32 run lengths (row-major, starting with a run of zeros).
std::vector<std::optional<PixelMask>> load_mask_sidecar(const fs::path& path,
                                                        std::size_t num_dets) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, kMaskMagic, 4) != 0)
    throw ValidationError("bad magic in mask sidecar " + path.string());
  (void)read_le<std::uint16_t>(in, path.string());
  const auto count = read_le<std::uint32_t>(in, path.string());
  if (count != num_dets)
    throw ValidationError("mask sidecar " + path.string() + " lists " + std::to_string(count) +
                          " detections but the JSON has " + std::to_string(num_dets));
  std::vector<std::optional<PixelMask>> masks(count);
  for (std::uint32_t d = 0; d < count; ++d) {
    if (read_le<std::uint8_t>(in, path.string()) == 0) continue;
    PixelMask m;
    m.width = static_cast<int>(read_le<std::uint32_t>(in, path.string()));
    m.height = static_cast<int>(read_le<std::uint32_t>(in, path.string()));
    const auto nruns = read_le<std::uint32_t>(in, path.string());
    m.bits.assign(static_cast<std::size_t>(m.width) * m.height, 0);
    std::size_t pos = 0;
    std::uint8_t value = 0;
    for (std::uint32_t r = 0; r < nruns; ++r) {
      const auto run = read_le<std::uint32_t>(in, path.string());
      if (pos + run > m.bits.size())
        throw ValidationError("RLE runs overflow mask area in " + path.string());
      if (value) std::fill_n(m.bits.begin() + pos, run, std::uint8_t{1});
      pos += run;
      value ^= 1;
    }
    if (pos != m.bits.size())
      throw ValidationError("RLE runs do not cover mask area in " + path.string());
    masks[d] = std::move(m);
  }
  return masks;
}

void save_mask_sidecar(const std::vector<Detection2D>& dets, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kMaskMagic, 4);
  write_le<std::uint16_t>(out, 1);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(dets.size()));
  for (const auto& det : dets) {
    write_le<std::uint8_t>(out, det.pixel_mask ? 1 : 0);
    if (!det.pixel_mask) continue;
    const PixelMask& m = *det.pixel_mask;
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.width));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.height));
    std::vector<std::uint32_t> runs;
    std::uint8_t value = 0;
    std::uint32_t run = 0;
    for (std::uint8_t bit : m.bits) {
      const std::uint8_t b = bit ? 1 : 0;
      if (b == value) {
        ++run;
      } else {
        runs.push_back(run);
        value = b;
        run = 1;
      }
    }
    runs.push_back(run);
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(runs.size()));
    for (std::uint32_t r : runs) write_le<std::uint32_t>(out, r);
  }
}

Rgb8 class_color(int class_id) {
  // Golden-ratio hue walk, full saturation; stable per class id.
  const double h = std::fmod(0.12 + 0.61803398875 * class_id, 1.0) * 6.0;
  const int sector = static_cast<int>(h);
  const double f = h - sector;
  const auto byte = [](double x) { return static_cast<std::uint8_t>(std::lround(x * 255.0)); };
  const double v = 0.95, p = 0.15, q = v - (v - p) * f, t = p + (v - p) * f;
  switch (sector % 6) {
    case 0: return {byte(v), byte(t), byte(p)};
    case 1: return {byte(q), byte(v), byte(p)};
    case 2: return {byte(p), byte(v), byte(t)};
    case 3: return {byte(p), byte(q), byte(v)};
    case 4: return {byte(t), byte(p), byte(v)};
    default: return {byte(v), byte(p), byte(q)};
  }
}

json instance_to_json(const InstancePrediction& pred) {
  return json{{"proposal_id", pred.proposal_id}, {"class_id", pred.class_id},
              {"prompt", pred.prompt},           {"s_class", pred.s_class},
              {"s_iou", pred.s_iou},             {"score", pred.score}};
}

}  // namespace

Eigen::Matrix4d read_matrix4_txt(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  Eigen::Matrix4d m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (!(in >> m(r, c)))
        throw ValidationError("malformed 4x4 matrix in " + path.string());
  if (!m.allFinite()) throw ValidationError("non-finite matrix entry in " + path.string());
  return m;
}

void write_matrix4_txt(const Eigen::Matrix4d& m, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  char buf[32];
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      std::snprintf(buf, sizeof(buf), "%.17g", m(r, c));
      out << buf << (c == 3 ? '\n' : ' ');
    }
  }
}

std::vector<Detection2D> load_frame_detections(const fs::path& json_path, int width, int height,
                                               std::size_t vocab_size) {
  const json j = load_json_file(json_path);
  if (!j.contains("detections") || !j["detections"].is_array())
    throw ValidationError(json_path.string() + " is missing the detections array");
  std::vector<Detection2D> dets;
  for (const auto& d : j["detections"]) {
    Detection2D det;
    const auto& box = d.at("box");
    if (!box.is_array() || box.size() != 4)
      throw ValidationError(json_path.string() + ": detection box must be [x1,y1,x2,y2]");
    det.x1 = box[0].get<double>();
    det.y1 = box[1].get<double>();
    det.x2 = box[2].get<double>();
    det.y2 = box[3].get<double>();
    det.class_id = d.at("class_id").get<int>();
    det.score = d.at("score").get<double>();
    try {
      dets.push_back(clamp_detection(det, width, height, vocab_size));
    } catch (const ValidationError& e) {
      throw ValidationError(json_path.string() + ": " + e.what());
    }
  }
  fs::path sidecar = json_path;
  sidecar.replace_extension(".masks");
  if (fs::exists(sidecar)) {
    auto masks = load_mask_sidecar(sidecar, dets.size());
    for (std::size_t i = 0; i < dets.size(); ++i) {
      if (!masks[i]) continue;
      if (masks[i]->width != width || masks[i]->height != height)
        throw ValidationError(sidecar.string() + ": mask dimensions do not match frame");
      dets[i].pixel_mask = std::move(masks[i]);
    }
  }
  return dets;
}

void save_frame_detections(const std::vector<Detection2D>& dets, const fs::path& json_path) {
  json arr = json::array();
  bool any_mask = false;
  for (const auto& det : dets) {
    arr.push_back(json{{"box", {det.x1, det.y1, det.x2, det.y2}},
                       {"class_id", det.class_id},
                       {"score", det.score}});
    any_mask |= det.pixel_mask.has_value();
  }
  dump_json_file(json{{"detections", arr}}, json_path);
  if (any_mask) {
    fs::path sidecar = json_path;
    sidecar.replace_extension(".masks");
    save_mask_sidecar(dets, sidecar);
  }
}

ProposalSet load_proposals(const fs::path& path, std::size_t num_points) {
  std::vector<std::vector<std::uint32_t>> masks;
  std::vector<double> confs;
  if (path.extension() == ".json") {
    const json j = load_json_file(path);
    for (const auto& p : j.at("proposals")) {
      confs.push_back(p.at("confidence").get<double>());
      masks.push_back(p.at("indices").get<std::vector<std::uint32_t>>());
    }
  } else {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, kProposalMagic, 4) != 0)
      throw ValidationError("bad magic in proposal file " + path.string());
    const auto version = read_le<std::uint16_t>(in, path.string());
    if (version != kProposalVersion)
      throw ValidationError("unsupported proposal file version " + std::to_string(version));
    const auto k = read_le<std::uint32_t>(in, path.string());
    masks.resize(k);
    confs.resize(k);
    for (std::uint32_t j = 0; j < k; ++j) {
      confs[j] = read_le<float>(in, path.string());
      const auto count = read_le<std::uint32_t>(in, path.string());
      masks[j].resize(count);
      if (!in.read(reinterpret_cast<char*>(masks[j].data()),
                   static_cast<std::streamsize>(count) * 4))
        throw ValidationError("truncated proposal indices in " + path.string());
    }
  }
  try {
    return ProposalSet(std::move(masks), std::move(confs), num_points);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void save_proposals_oy3d(const ProposalSet& props, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(kProposalMagic, 4);
  write_le<std::uint16_t>(out, kProposalVersion);
  write_le<std::uint32_t>(out, static_cast<std::uint32_t>(props.size()));
  for (std::size_t j = 0; j < props.size(); ++j) {
    write_le<float>(out, static_cast<float>(props.confidence(j)));
    write_le<std::uint32_t>(out, static_cast<std::uint32_t>(props.count(j)));
    out.write(reinterpret_cast<const char*>(props.mask(j).data()),
              static_cast<std::streamsize>(props.count(j)) * 4);
  }
  if (!out) throw IoError("failed writing " + path.string());
}

void save_proposals_json(const ProposalSet& props, const fs::path& path) {
  json arr = json::array();
  for (std::size_t j = 0; j < props.size(); ++j)
    arr.push_back(json{{"confidence", props.confidence(j)}, {"indices", props.mask(j)}});
  dump_json_file(json{{"proposals", arr}}, path);
}

PromptVocabulary load_vocabulary(const fs::path& path) {
  const json j = load_json_file(path);
  if (!j.is_array()) throw ValidationError(path.string() + " must be a JSON array of prompts");
  PromptVocabulary vocab{j.get<std::vector<std::string>>()};
  try {
    validate_vocabulary(vocab);
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  return vocab;
}

void save_vocabulary(const PromptVocabulary& vocab, const fs::path& path) {
  dump_json_file(json(vocab.prompts), path);
}

SceneBundle load_scene(const fs::path& root, const LoadConfig& cfg) {
  if (cfg.frame_stride < 1) throw ValidationError("frame stride must be >= 1");
  if (!(cfg.depth_scale > 0)) throw ValidationError("depth scale must be positive");
  if (!fs::is_directory(root)) throw IoError("scene directory not found: " + root.string());

  PointCloud cloud = fs::exists(root / "points.ply") ? read_ply(root / "points.ply")
                     : fs::exists(root / "points.bin")
                         ? load_points_bin(root / "points.bin")
                         : throw IoError("missing points.ply or points.bin in " + root.string());

  const Eigen::Matrix4d intrinsic = read_matrix4_txt(root / "intrinsic.txt");

  // Frames are named by integer id under pose/; cameras, depth maps and
  // detections stay index-aligned by that id.
  std::vector<long> ids;
  const fs::path pose_dir = root / "pose";
  if (!fs::is_directory(pose_dir)) throw IoError("missing pose directory in " + root.string());
  for (const auto& entry : fs::directory_iterator(pose_dir)) {
    if (entry.path().extension() != ".txt") continue;
    try {
      ids.push_back(std::stol(entry.path().stem().string()));
    } catch (...) {
      throw ValidationError("pose file name is not an integer id: " + entry.path().string());
    }
  }
  if (ids.empty()) throw ValidationError("no pose files in " + pose_dir.string());
  std::sort(ids.begin(), ids.end());

  PromptVocabulary vocab = load_vocabulary(root / "prompts.json");

  SceneBundle bundle{std::move(cloud), {}, {}, {}, ProposalSet({{0}}, {1.0}, 1), std::move(vocab)};
  for (std::size_t i = 0; i < ids.size(); i += static_cast<std::size_t>(cfg.frame_stride)) {
    const long id = ids[i];
    const std::string name = std::to_string(id);
    CameraFrame frame;
    frame.frame_id = static_cast<int>(id);
    frame.intrinsic = intrinsic;
    frame.camera_to_world = read_matrix4_txt(pose_dir / (name + ".txt"));
    try {
      frame.extrinsic = invert_pose(frame.camera_to_world);
    } catch (const ValidationError& e) {
      throw ValidationError("frame " + name + ": " + e.what());
    }
    const fs::path depth_path = root / "depth" / (name + ".png");
    if (!fs::exists(depth_path)) throw IoError("missing depth map " + depth_path.string());
    DepthMap dm = read_depth_png(depth_path, cfg.depth_scale);
    frame.width = dm.width;
    frame.height = dm.height;
    validate_camera(frame);

    const fs::path det_path = root / "detections" / (name + ".json");
    if (!fs::exists(det_path)) throw IoError("missing detections file " + det_path.string());
    bundle.detections.push_back(
        load_frame_detections(det_path, dm.width, dm.height, bundle.vocabulary.size()));
    bundle.frames.push_back(std::move(frame));
    bundle.depth_maps.push_back(std::move(dm));
  }

  const fs::path props_bin = root / "proposals.oy3d";
  const fs::path props_json = root / "proposals.json";
  if (fs::exists(props_bin))
    bundle.proposals = load_proposals(props_bin, bundle.cloud.size());
  else if (fs::exists(props_json))
    bundle.proposals = load_proposals(props_json, bundle.cloud.size());
  else
    throw IoError("missing proposals.oy3d or proposals.json in " + root.string());

  return bundle;
}

void save_predictions(const std::vector<InstancePrediction>& instances,
                      const std::vector<InstancePrediction>& unlabeled, bool keep_unlabeled,
                      const fs::path& out_path) {
  json j;
  j["instances"] = json::array();
  for (const auto& pred : instances) j["instances"].push_back(instance_to_json(pred));
  if (keep_unlabeled) {
    json diag = json::array();
    for (const auto& pred : unlabeled)
      diag.push_back(json{{"proposal_id", pred.proposal_id}, {"reason", "no visible votes"}});
    j["diagnostics"] = json{{"unlabeled", diag}};
  }
  dump_json_file(j, out_path);
}

void export_labeled_cloud(const PointCloud& cloud,
                          const std::vector<InstancePrediction>& instances,
                          const ProposalSet& props, const fs::path& out_path) {
  std::vector<Rgb8> colors(cloud.size(), Rgb8{128, 128, 128});
  for (const auto& pred : instances) {
    if (!pred.labeled) continue;
    const Rgb8 c = class_color(pred.class_id);
    for (std::uint32_t p : props.mask(pred.proposal_id)) colors[p] = c;
  }
  Eigen::Matrix4Xd pts = cloud.points();
  write_ply(PointCloud(std::move(pts), std::move(colors)), out_path);
}

}  // namespace oy3d
