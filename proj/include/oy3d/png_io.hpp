#pragma once

#include <filesystem>

#include "oy3d/geometry.hpp"

namespace oy3d {

// 16-bit single-channel PNG, stored value / depth_scale meters, 0 = no
// measurement.
DepthMap read_depth_png(const std::filesystem::path& path, double depth_scale);

void write_depth_png(const DepthMap& dm, const std::filesystem::path& path, double depth_scale);

}  // namespace oy3d
