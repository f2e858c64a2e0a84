#pragma once

#include <vector>

#include "gslam/core/types.hpp"

namespace gslam {

/// LiDAR scan in the sensor frame. Normals are optional and, where present,
/// unit length; `normal_valid[i] == 0` marks a degenerate neighborhood whose
/// point must be skipped by consumers that need a normal.
struct PointCloud {
  std::vector<Vec3> points;
  std::vector<Vec3> normals;
  std::vector<uint8_t> normal_valid;
  double timestamp = 0.0;

  size_t size() const { return points.size(); }
  bool has_normals() const { return normals.size() == points.size(); }
};

}  // namespace gslam
