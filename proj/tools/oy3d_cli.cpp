#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "oy3d/error.hpp"
#include "oy3d/evalap.hpp"
#include "oy3d/parallel.hpp"
#include "oy3d/pipeline.hpp"
#include "oy3d/scene_io.hpp"
#include "oy3d/synth.hpp"
#include "oy3d/visibility.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace oy3d;

namespace {

void log_stage(const std::string& stage, double seconds) {
  std::cerr << json{{"stage", stage}, {"seconds", seconds}}.dump() << '\n';
}

template <typename F>
double timed(const std::string& stage, F&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  log_stage(stage, s);
  return s;
}

int run_label(const fs::path& scene_dir, const fs::path& out_path, const RunConfig& cfg,
              const fs::path& export_ply) {
  const auto t0 = std::chrono::steady_clock::now();
  SceneBundle bundle = load_scene(scene_dir, LoadConfig{cfg.depth_scale, cfg.frame_stride});
  log_stage("load", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());

  const LabelResult result = run_label_pipeline(bundle, cfg);
  for (const auto& [stage, seconds] : result.stage_seconds) log_stage(stage, seconds);

  timed("save", [&] {
    save_predictions(result.instances, result.unlabeled, cfg.keep_unlabeled, out_path);
    if (!export_ply.empty())
      export_labeled_cloud(bundle.cloud, result.instances, bundle.proposals, export_ply);
  });
  std::cout << "wrote " << out_path.string() << " (" << result.instances.size() << " instances, "
            << result.unlabeled.size() << " unlabeled)\n";
  return 0;
}

std::vector<EvalPrediction> load_eval_predictions(const fs::path& pred_path,
                                                  const fs::path& proposals_path,
                                                  std::size_t num_points) {
  std::ifstream in(pred_path);
  if (!in) throw IoError("cannot open " + pred_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + pred_path.string() + ": " + e.what());
  }
  std::vector<EvalPrediction> preds;
  std::optional<ProposalSet> props;
  for (const auto& inst : j.at("instances")) {
    EvalPrediction p;
    p.class_id = inst.at("class_id").get<int>();
    p.score = inst.at("score").get<double>();
    if (inst.contains("points")) {
      p.point_indices = inst["points"].get<std::vector<std::uint32_t>>();
    } else {
      if (proposals_path.empty())
        throw ValidationError(
            "predictions carry no point masks; pass --proposals to resolve proposal ids");
      if (!props)
        props = load_proposals(proposals_path,
                               num_points > 0 ? num_points : std::numeric_limits<std::size_t>::max());
      const auto id = inst.at("proposal_id").get<std::size_t>();
      if (id >= props->size())
        throw ValidationError("prediction references proposal " + std::to_string(id) +
                              " beyond proposal set size");
      p.point_indices = props->mask(id);
    }
    std::sort(p.point_indices.begin(), p.point_indices.end());
    if (std::adjacent_find(p.point_indices.begin(), p.point_indices.end()) !=
        p.point_indices.end())
      throw ValidationError("prediction mask has duplicate point indices");
    if (num_points > 0 && !p.point_indices.empty() && p.point_indices.back() >= num_points)
      throw ValidationError("prediction mask index out of range");
    preds.push_back(std::move(p));
  }
  return preds;
}

int run_eval(const fs::path& pred_path, const fs::path& gt_path, const fs::path& out_path,
             const fs::path& proposals_path) {
  std::ifstream in(gt_path);
  if (!in) throw IoError("cannot open " + gt_path.string());
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError("malformed JSON in " + gt_path.string() + ": " + e.what());
  }
  const std::size_t num_points = j.value("num_points", std::size_t{0});
  std::vector<GroundTruthInstance> gts;
  for (const auto& inst : j.at("instances")) {
    GroundTruthInstance g;
    g.class_id = inst.at("class_id").get<int>();
    g.point_indices = inst.at("points").get<std::vector<std::uint32_t>>();
    std::sort(g.point_indices.begin(), g.point_indices.end());
    if (g.point_indices.empty()) throw ValidationError("ground truth instance has no points");
    gts.push_back(std::move(g));
  }

  const auto preds = load_eval_predictions(pred_path, proposals_path, num_points);
  const APReport report = evaluate_ap(preds, gts);

  json out{{"map", report.map}, {"map50", report.map50}, {"map25", report.map25}};
  out["per_class"] = json::object();
  for (const auto& [cls, ap] : report.per_class_map)
    out["per_class"][std::to_string(cls)] = ap;
  if (!out_path.empty()) {
    std::ofstream os(out_path);
    if (!os) throw IoError("cannot write " + out_path.string());
    os << out.dump(2) << '\n';
  }
  std::cout << out.dump(2) << '\n';
  return 0;
}

int run_synth(const fs::path& config_path, const fs::path& out_dir) {
  const SynthConfig cfg = parse_synth_config(config_path);
  const SynthScene scene = generate_scene(cfg);
  write_scene(scene, out_dir);
  std::cout << "wrote scene to " << out_dir.string() << " (" << scene.bundle.cloud.size()
            << " points, " << scene.bundle.frames.size() << " frames, "
            << scene.bundle.proposals.size() << " proposals)\n";
  return 0;
}

int run_visibility(const fs::path& scene_dir, const fs::path& out_path, double tau_depth,
                   int frame_stride, double depth_scale) {
  const SceneBundle bundle = load_scene(scene_dir, LoadConfig{depth_scale, frame_stride});
  const VisibilityConfig cfg{tau_depth, true};
  const PointVisibility pv =
      compute_point_visibility(bundle.cloud, bundle.frames, bundle.depth_maps, cfg);
  const VisibilityMatrix vis = compute_mask_visibility(pv, bundle.proposals);

  json rows = json::array();
  for (std::size_t i = 0; i < vis.num_frames; ++i) {
    json row = json::array();
    for (std::size_t k = 0; k < vis.num_proposals; ++k) row.push_back(vis.at(i, k));
    rows.push_back(std::move(row));
  }
  const json out{{"num_frames", vis.num_frames},
                 {"num_proposals", vis.num_proposals},
                 {"fractions", rows}};
  if (!out_path.empty()) {
    std::ofstream os(out_path);
    if (!os) throw IoError("cannot write " + out_path.string());
    os << out.dump(2) << '\n';
  } else {
    std::cout << out.dump(2) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Open-vocabulary labeling of class-agnostic 3D instance proposals"};
  app.require_subcommand(1);

  // label
  auto* label = app.add_subcommand("label", "Label a scene's 3D proposals from 2D detections");
  fs::path scene_dir, out_path, export_ply;
  RunConfig cfg;
  std::string mode = "LG";
  label->add_option("scene", scene_dir, "Scene directory")->required();
  label->add_option("--out", out_path, "Output predictions.json");
  label->add_option("--topk", cfg.topk, "Frames voting per proposal");
  label->add_option("--tau-depth", cfg.tau_depth, "Occlusion depth tolerance, meters");
  label->add_option("--nms", cfg.nms_iou, "Proposal NMS IoU threshold");
  label->add_option("--frame-stride", cfg.frame_stride, "Process every n-th frame");
  label->add_option("--depth-scale", cfg.depth_scale, "Depth PNG units per meter");
  label->add_option("--label-map-mode", mode, "LG or HG")
      ->check(CLI::IsMember({"LG", "HG"}));
  label->add_flag("--keep-unlabeled", cfg.keep_unlabeled,
                  "List unlabeled proposals in a diagnostics section");
  label->add_option("--threads", cfg.threads, "Worker threads (0 = all cores)");
  label->add_option("--export-ply", export_ply, "Also write a class-colored point cloud");

  // eval
  auto* eval = app.add_subcommand("eval", "Average-precision evaluation against ground truth");
  fs::path pred_path, gt_path, report_path, proposals_path;
  eval->add_option("--pred", pred_path, "predictions.json")->required();
  eval->add_option("--gt", gt_path, "gt.json")->required();
  eval->add_option("--out", report_path, "report.json");
  eval->add_option("--proposals", proposals_path,
                   "Proposal file used to resolve proposal ids to point masks");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate a synthetic scene");
  fs::path synth_config, synth_out;
  synth->add_option("--config", synth_config, "synth.json")->required();
  synth->add_option("--out", synth_out, "Output scene directory")->required();

  // visibility
  auto* visibility = app.add_subcommand("visibility", "Dump the per-proposal visibility matrix");
  fs::path vis_scene, vis_out;
  double vis_tau = 0.10, vis_scale = 1000.0;
  int vis_stride = 1;
  visibility->add_option("scene", vis_scene, "Scene directory")->required();
  visibility->add_option("--out", vis_out, "Output JSON (default stdout)");
  visibility->add_option("--tau-depth", vis_tau, "Occlusion depth tolerance, meters");
  visibility->add_option("--frame-stride", vis_stride, "Process every n-th frame");
  visibility->add_option("--depth-scale", vis_scale, "Depth PNG units per meter");

  CLI11_PARSE(app, argc, argv);

  try {
    if (label->parsed()) {
      cfg.label_map_mode = mode == "HG" ? LabelMapMode::HG : LabelMapMode::LG;
      if (out_path.empty()) out_path = scene_dir / "predictions.json";
      return run_label(scene_dir, out_path, cfg, export_ply);
    }
    if (eval->parsed()) return run_eval(pred_path, gt_path, report_path, proposals_path);
    if (synth->parsed()) return run_synth(synth_config, synth_out);
    if (visibility->parsed())
      return run_visibility(vis_scene, vis_out, vis_tau, vis_stride, vis_scale);
  } catch (const ValidationError& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "input"}}.dump() << '\n';
    return 2;
  } catch (const IoError& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "input"}}.dump() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}, {"kind", "internal"}}.dump() << '\n';
    return 3;
  }
  return 0;
}
