#include "gslam/io/image_io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

#include "gslam/core/errors.hpp"

namespace gslam::io {

namespace {

uint8_t to_byte(double v) {
  return static_cast<uint8_t>(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5);
}

}  // namespace

void write_ppm(const std::string& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UnreadableFile(path);
  out << "P6\n" << img.width << " " << img.height << "\n255\n";
  std::vector<uint8_t> row(static_cast<size_t>(img.width) * 3);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      const Vec3& c = img.at(x, y);
      row[3 * x + 0] = to_byte(c.x());
      row[3 * x + 1] = to_byte(c.y());
      row[3 * x + 2] = to_byte(c.z());
    }
    out.write(reinterpret_cast<const char*>(row.data()), row.size());
  }
}

Image read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableFile(path);
  std::string magic;
  in >> magic;
  if (magic != "P6") throw UnreadableFile(path + " (not a P6 ppm)");
  int w = 0, h = 0, maxval = 0;
  in >> w >> h >> maxval;
  in.get();  // single whitespace after header
  if (w <= 0 || h <= 0 || maxval != 255) throw UnreadableFile(path + " (bad ppm header)");
  Image img(w, h);
  std::vector<uint8_t> row(static_cast<size_t>(w) * 3);
  for (int y = 0; y < h; ++y) {
    in.read(reinterpret_cast<char*>(row.data()), row.size());
    if (!in) throw UnreadableFile(path + " (truncated)");
    for (int x = 0; x < w; ++x)
      img.at(x, y) = Vec3(row[3 * x], row[3 * x + 1], row[3 * x + 2]) / 255.0;
  }
  return img;
}

void write_pfm(const std::string& path, const Grid& grid) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UnreadableFile(path);
  // Scale -1.0 marks little-endian; PFM rows run bottom-to-top.
  out << "Pf\n" << grid.width << " " << grid.height << "\n-1.0\n";
  std::vector<float> row(grid.width);
  for (int y = grid.height - 1; y >= 0; --y) {
    for (int x = 0; x < grid.width; ++x) row[x] = static_cast<float>(grid.at(x, y));
    out.write(reinterpret_cast<const char*>(row.data()), row.size() * sizeof(float));
  }
}

Grid read_pfm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableFile(path);
  std::string magic;
  in >> magic;
  if (magic != "Pf") throw UnreadableFile(path + " (not a grayscale pfm)");
  int w = 0, h = 0;
  double scale = 0;
  in >> w >> h >> scale;
  in.get();
  if (w <= 0 || h <= 0 || scale >= 0) throw UnreadableFile(path + " (bad pfm header)");
  Grid grid(w, h);
  std::vector<float> row(w);
  for (int y = h - 1; y >= 0; --y) {
    in.read(reinterpret_cast<char*>(row.data()), row.size() * sizeof(float));
    if (!in) throw UnreadableFile(path + " (truncated)");
    for (int x = 0; x < w; ++x) grid.at(x, y) = row[x];
  }
  return grid;
}

}  // namespace gslam::io
