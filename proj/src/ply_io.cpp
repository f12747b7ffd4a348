#include "oy3d/ply_io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "oy3d/error.hpp"

namespace oy3d {

namespace {

struct PlyProperty {
  std::string type;
  std::string name;
};

std::size_t type_size(const std::string& t) {
  if (t == "char" || t == "uchar" || t == "int8" || t == "uint8") return 1;
  if (t == "short" || t == "ushort" || t == "int16" || t == "uint16") return 2;
  if (t == "int" || t == "uint" || t == "int32" || t == "uint32" || t == "float" ||
      t == "float32")
    return 4;
  if (t == "double" || t == "float64") return 8;
  throw ValidationError("unsupported PLY property type: " + t);
}

double read_scalar_le(const char* p, const std::string& t) {
  if (t == "float" || t == "float32") {
    float f;
    std::memcpy(&f, p, 4);
    return f;
  }
  if (t == "double" || t == "float64") {
    double d;
    std::memcpy(&d, p, 8);
    return d;
  }
  if (t == "uchar" || t == "uint8") return static_cast<unsigned char>(*p);
  throw ValidationError("unsupported PLY scalar read for type " + t);
}

}  // namespace

PointCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open PLY file: " + path.string());

  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0)
    throw ValidationError("not a PLY file: " + path.string());

  std::string format;
  std::size_t vertex_count = 0;
  std::vector<PlyProperty> props;
  bool in_vertex_element = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok == "format") {
      ls >> format;
    } else if (tok == "comment") {
      continue;
    } else if (tok == "element") {
      std::string name;
      std::size_t cnt;
      ls >> name >> cnt;
      in_vertex_element = (name == "vertex");
      if (in_vertex_element) vertex_count = cnt;
      else if (cnt != 0)
        throw ValidationError("PLY with non-vertex elements not supported: " + path.string());
    } else if (tok == "property") {
      if (!in_vertex_element) continue;
      PlyProperty p;
      ls >> p.type >> p.name;
      if (p.type == "list") throw ValidationError("PLY list properties not supported");
      props.push_back(p);
    } else if (tok == "end_header") {
      break;
    }
  }
  if (format != "ascii" && format != "binary_little_endian")
    throw ValidationError("unsupported PLY format: " + format);
  if (vertex_count == 0) throw ValidationError("PLY has no vertices: " + path.string());

  int xi = -1, yi = -1, zi = -1, ri = -1, gi = -1, bi = -1;
  for (std::size_t i = 0; i < props.size(); ++i) {
    if (props[i].name == "x") xi = static_cast<int>(i);
    if (props[i].name == "y") yi = static_cast<int>(i);
    if (props[i].name == "z") zi = static_cast<int>(i);
    if (props[i].name == "red") ri = static_cast<int>(i);
    if (props[i].name == "green") gi = static_cast<int>(i);
    if (props[i].name == "blue") bi = static_cast<int>(i);
  }
  if (xi < 0 || yi < 0 || zi < 0)
    throw ValidationError("PLY is missing x/y/z properties: " + path.string());
  const bool has_rgb = ri >= 0 && gi >= 0 && bi >= 0;

  Eigen::Matrix4Xd points(4, static_cast<Eigen::Index>(vertex_count));
  std::vector<Rgb8> colors;
  if (has_rgb) colors.resize(vertex_count);

  if (format == "ascii") {
    for (std::size_t v = 0; v < vertex_count; ++v) {
      std::vector<double> vals(props.size());
      for (auto& x : vals)
        if (!(in >> x)) throw ValidationError("truncated PLY vertex data: " + path.string());
      points.col(v) << vals[xi], vals[yi], vals[zi], 1.0;
      if (has_rgb)
        colors[v] = Rgb8{static_cast<std::uint8_t>(vals[ri]), static_cast<std::uint8_t>(vals[gi]),
                         static_cast<std::uint8_t>(vals[bi])};
    }
  } else {
    std::size_t stride = 0;
    std::vector<std::size_t> offsets(props.size());
    for (std::size_t i = 0; i < props.size(); ++i) {
      offsets[i] = stride;
      stride += type_size(props[i].type);
    }
    std::vector<char> row(stride);
    for (std::size_t v = 0; v < vertex_count; ++v) {
      if (!in.read(row.data(), static_cast<std::streamsize>(stride)))
        throw ValidationError("truncated PLY vertex data: " + path.string());
      points.col(v) << read_scalar_le(row.data() + offsets[xi], props[xi].type),
          read_scalar_le(row.data() + offsets[yi], props[yi].type),
          read_scalar_le(row.data() + offsets[zi], props[zi].type), 1.0;
      if (has_rgb)
        colors[v] =
            Rgb8{static_cast<std::uint8_t>(read_scalar_le(row.data() + offsets[ri], props[ri].type)),
                 static_cast<std::uint8_t>(read_scalar_le(row.data() + offsets[gi], props[gi].type)),
                 static_cast<std::uint8_t>(read_scalar_le(row.data() + offsets[bi], props[bi].type))};
    }
  }
  return PointCloud(std::move(points), std::move(colors));
}

void write_ply(const PointCloud& cloud, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write PLY file: " + path.string());
  const bool has_rgb = cloud.has_colors();
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n";
  if (has_rgb) out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    double xyz[3] = {cloud.points()(0, i), cloud.points()(1, i), cloud.points()(2, i)};
    out.write(reinterpret_cast<const char*>(xyz), sizeof(xyz));
    if (has_rgb) {
      const Rgb8& c = cloud.colors()[i];
      const std::uint8_t rgb[3] = {c.r, c.g, c.b};
      out.write(reinterpret_cast<const char*>(rgb), 3);
    }
  }
  if (!out) throw IoError("failed writing PLY file: " + path.string());
}

}  // namespace oy3d
