#include "oy3d/visibility.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "oy3d/error.hpp"
#include "oy3d/parallel.hpp"

namespace oy3d {

namespace {

void check_depth_dims(const CameraFrame& frame, const DepthMap& dm) {
  if (dm.width != frame.width || dm.height != frame.height ||
      dm.depth.size() != static_cast<std::size_t>(dm.width) * dm.height ||
      dm.valid.size() != dm.depth.size())
    throw ValidationError("frame " + std::to_string(frame.frame_id) +
                          ": depth map dimensions do not match camera frame");
}

inline bool depth_unoccluded(double pixel_x, double pixel_y, double depth_z, const DepthMap& dm,
                             const VisibilityConfig& cfg) {
  const int u = static_cast<int>(std::lround(pixel_x));
  const int v = static_cast<int>(std::lround(pixel_y));
  if (!dm.valid_at(u, v)) return !cfg.treat_invalid_depth_as_occluded;
  return std::abs(depth_z - static_cast<double>(dm.at(u, v))) < cfg.tau_depth;
}

void fill_frame_rows(const Projection& proj, const CameraFrame& frame, const DepthMap& dm,
                     const VisibilityConfig& cfg, std::uint8_t* in_frame,
                     std::uint8_t* unoccluded) {
  const std::size_t n = proj.pixel_x.size();
  for (std::size_t p = 0; p < n; ++p) {
    const bool in = point_in_frame(proj.pixel_x[p], proj.pixel_y[p], proj.depth_z[p],
                                   frame.width, frame.height);
    in_frame[p] = in ? 1 : 0;
    unoccluded[p] =
        (in && depth_unoccluded(proj.pixel_x[p], proj.pixel_y[p], proj.depth_z[p], dm, cfg)) ? 1
                                                                                             : 0;
  }
}

}  // namespace

ProposalSet::ProposalSet(std::vector<std::vector<std::uint32_t>> masks,
                         std::vector<double> confidences, std::size_t num_points)
    : masks_(std::move(masks)), confidences_(std::move(confidences)), num_points_(num_points) {
  if (masks_.size() != confidences_.size())
    throw ValidationError("proposal mask and confidence counts differ");
  for (std::size_t j = 0; j < masks_.size(); ++j) {
    auto& m = masks_[j];
    if (m.empty()) throw ValidationError("proposal " + std::to_string(j) + " is empty");
    std::sort(m.begin(), m.end());
    if (std::adjacent_find(m.begin(), m.end()) != m.end())
      throw ValidationError("proposal " + std::to_string(j) + " has duplicate point indices");
    if (m.back() >= num_points_)
      throw ValidationError("proposal " + std::to_string(j) + " references point " +
                            std::to_string(m.back()) + " beyond cloud size");
    if (!(confidences_[j] >= 0.0 && confidences_[j] <= 1.0))
      throw ValidationError("proposal " + std::to_string(j) + " confidence outside [0,1]");
  }
}

ProposalSet ProposalSet::subset(const std::vector<std::size_t>& keep) const {
  std::vector<std::vector<std::uint32_t>> masks;
  std::vector<double> confs;
  masks.reserve(keep.size());
  confs.reserve(keep.size());
  for (std::size_t j : keep) {
    masks.push_back(masks_[j]);
    confs.push_back(confidences_[j]);
  }
  return ProposalSet(std::move(masks), std::move(confs), num_points_);
}

bool point_in_frame(double pixel_x, double pixel_y, double depth_z, int width, int height) {
  if (!(depth_z > 0.0)) return false;
  const long u = std::lround(pixel_x);
  const long v = std::lround(pixel_y);
  return u >= 0 && u < width && v >= 0 && v < height;
}

void compute_frame_visibility(const std::vector<Projection>& projections,
                              const std::vector<CameraFrame>& frames, PointVisibility& pv) {
  const std::size_t nf = frames.size();
  const std::size_t n = nf == 0 ? 0 : projections.at(0).pixel_x.size();
  pv.num_frames = nf;
  pv.num_points = n;
  pv.in_frame.assign(nf * n, 0);
  pv.unoccluded.assign(nf * n, 0);
  parallel_for(nf, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Projection& proj = projections[i];
      std::uint8_t* row = pv.in_frame.data() + i * n;
      for (std::size_t p = 0; p < n; ++p)
        row[p] = point_in_frame(proj.pixel_x[p], proj.pixel_y[p], proj.depth_z[p],
                                frames[i].width, frames[i].height)
                     ? 1
                     : 0;
    }
  });
}

void compute_depth_visibility(const std::vector<Projection>& projections,
                              const std::vector<CameraFrame>& frames,
                              const std::vector<DepthMap>& depth_maps,
                              const VisibilityConfig& cfg, PointVisibility& pv) {
  for (std::size_t i = 0; i < frames.size(); ++i) check_depth_dims(frames[i], depth_maps[i]);
  const std::size_t n = pv.num_points;
  parallel_for(frames.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Projection& proj = projections[i];
      const std::uint8_t* in = pv.in_frame.data() + i * n;
      std::uint8_t* out = pv.unoccluded.data() + i * n;
      for (std::size_t p = 0; p < n; ++p)
        out[p] = (in[p] && depth_unoccluded(proj.pixel_x[p], proj.pixel_y[p], proj.depth_z[p],
                                            depth_maps[i], cfg))
                     ? 1
                     : 0;
    }
  });
}

PointVisibility compute_point_visibility(const PointCloud& cloud,
                                         const std::vector<CameraFrame>& frames,
                                         const std::vector<DepthMap>& depth_maps,
                                         const VisibilityConfig& cfg) {
  if (frames.size() != depth_maps.size())
    throw ValidationError("frame and depth map counts differ");
  for (std::size_t i = 0; i < frames.size(); ++i) check_depth_dims(frames[i], depth_maps[i]);
  PointVisibility pv;
  pv.num_frames = frames.size();
  pv.num_points = cloud.size();
  pv.in_frame.assign(pv.num_frames * pv.num_points, 0);
  pv.unoccluded.assign(pv.num_frames * pv.num_points, 0);
  // Frame-blocked: each worker projects one frame at a time and drops the
  // projection immediately, keeping memory at O(frames_in_flight * N).
  parallel_for(frames.size(), [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const Projection proj = project_frame(cloud, frames[i]);
      fill_frame_rows(proj, frames[i], depth_maps[i], cfg,
                      pv.in_frame.data() + i * pv.num_points,
                      pv.unoccluded.data() + i * pv.num_points);
    }
  });
  return pv;
}

VisibilityMatrix compute_mask_visibility(const PointVisibility& pv, const ProposalSet& props) {
  if (pv.num_points != props.num_points())
    throw ValidationError("visibility and proposal point counts differ");
  VisibilityMatrix vm;
  vm.num_frames = pv.num_frames;
  vm.num_proposals = props.size();
  vm.fractions.assign(vm.num_frames * vm.num_proposals, 0.0);
  parallel_for(pv.num_frames, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const std::uint8_t* row = pv.unoccluded_row(i);
      double* out = vm.fractions.data() + i * vm.num_proposals;
      for (std::size_t j = 0; j < props.size(); ++j) {
        std::size_t cnt = 0;
        for (std::uint32_t p : props.mask(j)) cnt += row[p];
        out[j] = static_cast<double>(cnt) / static_cast<double>(props.count(j));
      }
    }
  });
  return vm;
}

PointVisibility oracle_point_visibility(const PointCloud& cloud,
                                        const std::vector<CameraFrame>& frames,
                                        const std::vector<DepthMap>& depth_maps,
                                        const VisibilityConfig& cfg) {
  for (std::size_t i = 0; i < frames.size(); ++i) check_depth_dims(frames[i], depth_maps[i]);
  const std::size_t n = cloud.size();
  PointVisibility pv;
  pv.num_frames = frames.size();
  pv.num_points = n;
  pv.in_frame.assign(pv.num_frames * n, 0);
  pv.unoccluded.assign(pv.num_frames * n, 0);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    // Deliberately scalar and unbatched.
    double t[4][4];
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) {
        double acc = 0.0;
        for (int k = 0; k < 4; ++k) acc += frames[i].intrinsic(r, k) * frames[i].extrinsic(k, c);
        t[r][c] = acc;
      }
    for (std::size_t p = 0; p < n; ++p) {
      double q[3];
      for (int r = 0; r < 3; ++r) {
        double acc = 0.0;
        for (int c = 0; c < 4; ++c) acc += t[r][c] * cloud.points()(c, p);
        q[r] = acc;
      }
      const double z = q[2];
      if (!(z > 0.0)) continue;
      const double px = q[0] / z;
      const double py = q[1] / z;
      const long u = std::lround(px);
      const long v = std::lround(py);
      if (u < 0 || u >= frames[i].width || v < 0 || v >= frames[i].height) continue;
      pv.in_frame[i * n + p] = 1;
      bool unocc;
      if (!depth_maps[i].valid_at(static_cast<int>(u), static_cast<int>(v)))
        unocc = !cfg.treat_invalid_depth_as_occluded;
      else
        unocc = std::abs(z - static_cast<double>(depth_maps[i].at(static_cast<int>(u),
                                                                  static_cast<int>(v)))) <
                cfg.tau_depth;
      if (unocc) pv.unoccluded[i * n + p] = 1;
    }
  }
  return pv;
}

VisibilityMatrix oracle_mask_visibility(const PointCloud& cloud,
                                        const std::vector<CameraFrame>& frames,
                                        const std::vector<DepthMap>& depth_maps,
                                        const ProposalSet& props, const VisibilityConfig& cfg) {
  const PointVisibility pv = oracle_point_visibility(cloud, frames, depth_maps, cfg);
  VisibilityMatrix vm;
  vm.num_frames = frames.size();
  vm.num_proposals = props.size();
  vm.fractions.assign(vm.num_frames * vm.num_proposals, 0.0);
  for (std::size_t i = 0; i < vm.num_frames; ++i)
    for (std::size_t j = 0; j < props.size(); ++j) {
      std::size_t cnt = 0;
      for (std::uint32_t p : props.mask(j))
        if (pv.unoccluded[i * pv.num_points + p]) ++cnt;
      vm.fractions[i * vm.num_proposals + j] =
          static_cast<double>(cnt) / static_cast<double>(props.count(j));
    }
  return vm;
}

}  // namespace oy3d
