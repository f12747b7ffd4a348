#include "oy3d/png_io.hpp"

#include <png.h>

#include <cmath>
#include <cstdio>
#include <memory>
#include <vector>

#include "oy3d/error.hpp"

namespace oy3d {

namespace {

struct FileCloser {
  void operator()(std::FILE* f) const {
    if (f) std::fclose(f);
  }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

}  // namespace

DepthMap read_depth_png(const std::filesystem::path& path, double depth_scale) {
  FilePtr fp(std::fopen(path.string().c_str(), "rb"));
  if (!fp) throw IoError("cannot open depth image: " + path.string());

  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw IoError("libpng init failed for " + path.string());
  }
  std::vector<std::vector<png_byte>> rows;
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ValidationError("malformed PNG: " + path.string());
  }
  png_init_io(png, fp.get());
  png_read_info(png, info);

  const png_uint_32 width = png_get_image_width(png, info);
  const png_uint_32 height = png_get_image_height(png, info);
  const int bit_depth = png_get_bit_depth(png, info);
  const int color_type = png_get_color_type(png, info);
  if (bit_depth != 16 || color_type != PNG_COLOR_TYPE_GRAY) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw ValidationError("depth image must be 16-bit grayscale PNG: " + path.string());
  }

  rows.assign(height, std::vector<png_byte>(png_get_rowbytes(png, info)));
  std::vector<png_bytep> row_ptrs(height);
  for (png_uint_32 v = 0; v < height; ++v) row_ptrs[v] = rows[v].data();
  png_read_image(png, row_ptrs.data());
  png_read_end(png, nullptr);
  png_destroy_read_struct(&png, &info, nullptr);

  DepthMap dm;
  dm.width = static_cast<int>(width);
  dm.height = static_cast<int>(height);
  dm.depth.resize(static_cast<std::size_t>(width) * height, 0.0f);
  dm.valid.resize(dm.depth.size(), 0);
  for (png_uint_32 v = 0; v < height; ++v) {
    const png_byte* row = rows[v].data();
    for (png_uint_32 u = 0; u < width; ++u) {
      // PNG 16-bit samples are big-endian.
      const unsigned raw = (static_cast<unsigned>(row[2 * u]) << 8) | row[2 * u + 1];
      const std::size_t idx = static_cast<std::size_t>(v) * width + u;
      if (raw != 0) {
        dm.depth[idx] = static_cast<float>(raw / depth_scale);
        dm.valid[idx] = 1;
      }
    }
  }
  return dm;
}

void write_depth_png(const DepthMap& dm, const std::filesystem::path& path, double depth_scale) {
  FilePtr fp(std::fopen(path.string().c_str(), "wb"));
  if (!fp) throw IoError("cannot write depth image: " + path.string());

  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info) {
    png_destroy_write_struct(&png, &info);
    throw IoError("libpng init failed for " + path.string());
  }
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw IoError("PNG write failed: " + path.string());
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, static_cast<png_uint_32>(dm.width),
               static_cast<png_uint_32>(dm.height), 16, PNG_COLOR_TYPE_GRAY,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);

  std::vector<png_byte> row(static_cast<std::size_t>(dm.width) * 2);
  for (int v = 0; v < dm.height; ++v) {
    for (int u = 0; u < dm.width; ++u) {
      long q = 0;
      if (dm.valid_at(u, v)) {
        q = std::lround(static_cast<double>(dm.at(u, v)) * depth_scale);
        if (q < 1 || q > 65535) q = 0;
      }
      row[2 * u] = static_cast<png_byte>((q >> 8) & 0xff);
      row[2 * u + 1] = static_cast<png_byte>(q & 0xff);
    }
    png_write_row(png, row.data());
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace oy3d
