#pragma once

#include <filesystem>

#include "oy3d/geometry.hpp"

namespace oy3d {

// Supports ascii and binary_little_endian vertex-only PLY with float or
// double x/y/z and optional uchar red/green/blue.
PointCloud read_ply(const std::filesystem::path& path);

// Writes binary_little_endian with double coordinates (so coordinates
// round-trip bit-exactly) and uchar colors when present.
void write_ply(const PointCloud& cloud, const std::filesystem::path& path);

}  // namespace oy3d
