#include "gslam/io/ply.hpp"

#include <fstream>
#include <sstream>
#include <vector>

#include "gslam/core/errors.hpp"

namespace gslam::io {

void write_splat_ply(const std::string& path, const GaussianMap& map) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UnreadableFile(path);
  out << "ply\nformat binary_little_endian 1.0\n";
  out << "element vertex " << map.size() << "\n";
  const char* props[] = {"x",       "y",       "z",      "opacity", "scale_0",
                         "scale_1", "scale_2", "rot_0",  "rot_1",   "rot_2",
                         "rot_3",   "f_dc_0",  "f_dc_1", "f_dc_2"};
  for (const char* p : props) out << "property float " << p << "\n";
  out << "property uchar reliable\n";
  out << "end_header\n";

  for (size_t i = 0; i < map.size(); ++i) {
    const GaussianPrimitive& g = map.primitive(static_cast<int>(i));
    float row[14] = {
        static_cast<float>(g.mean.x()),       static_cast<float>(g.mean.y()),
        static_cast<float>(g.mean.z()),       static_cast<float>(g.opacity),
        static_cast<float>(g.log_scales[0]),  static_cast<float>(g.log_scales[1]),
        static_cast<float>(g.log_scales[2]),  static_cast<float>(g.rotation.w()),
        static_cast<float>(g.rotation.x()),   static_cast<float>(g.rotation.y()),
        static_cast<float>(g.rotation.z()),   static_cast<float>(g.color.x()),
        static_cast<float>(g.color.y()),      static_cast<float>(g.color.z())};
    out.write(reinterpret_cast<const char*>(row), sizeof(row));
    const uint8_t reliable = g.reliable ? 1 : 0;
    out.write(reinterpret_cast<const char*>(&reliable), 1);
  }
}

GaussianMap read_splat_ply(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableFile(path);
  std::string line;
  size_t count = 0;
  std::vector<std::string> float_props;
  bool has_reliable = false;
  bool binary = false;
  while (std::getline(in, line)) {
    std::istringstream ss(line);
    std::string tok;
    ss >> tok;
    if (tok == "format") {
      std::string fmt;
      ss >> fmt;
      binary = fmt == "binary_little_endian";
    } else if (tok == "element") {
      std::string kind;
      ss >> kind >> count;
      if (kind != "vertex") throw UnreadableFile(path + " (unsupported element)");
    } else if (tok == "property") {
      std::string type, name;
      ss >> type >> name;
      if (type == "float")
        float_props.push_back(name);
      else if (type == "uchar" && name == "reliable")
        has_reliable = true;
      else
        throw UnreadableFile(path + " (unsupported property " + name + ")");
    } else if (tok == "end_header") {
      break;
    }
  }
  if (!binary) throw UnreadableFile(path + " (expected binary_little_endian)");

  auto index_of = [&](const std::string& name) {
    for (size_t i = 0; i < float_props.size(); ++i)
      if (float_props[i] == name) return static_cast<int>(i);
    throw UnreadableFile(path + " (missing property " + name + ")");
  };
  const int ix = index_of("x"), iy = index_of("y"), iz = index_of("z");
  const int iop = index_of("opacity");
  const int is0 = index_of("scale_0"), is1 = index_of("scale_1"), is2 = index_of("scale_2");
  const int ir0 = index_of("rot_0"), ir1 = index_of("rot_1"), ir2 = index_of("rot_2"),
            ir3 = index_of("rot_3");
  const int ic0 = index_of("f_dc_0"), ic1 = index_of("f_dc_1"), ic2 = index_of("f_dc_2");

  GaussianMap map;
  std::vector<float> row(float_props.size());
  for (size_t i = 0; i < count; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), row.size() * sizeof(float));
    uint8_t reliable = 1;
    if (has_reliable) in.read(reinterpret_cast<char*>(&reliable), 1);
    if (!in) throw UnreadableFile(path + " (truncated)");
    GaussianPrimitive g;
    g.mean = Vec3(row[ix], row[iy], row[iz]);
    g.opacity = row[iop];
    g.log_scales = Vec3(row[is0], row[is1], row[is2]);
    // stored coefficients are kept verbatim so export(import(x)) is byte-stable
    g.rotation = Quat(row[ir0], row[ir1], row[ir2], row[ir3]);
    g.color = Vec3(row[ic0], row[ic1], row[ic2]);
    g.reliable = reliable != 0;
    map.add(g);
  }
  return map;
}

}  // namespace gslam::io
