#pragma once

#include <vector>

#include "gslam/core/pose.hpp"
#include "gslam/ingest/cloud.hpp"

namespace gslam {

/// Row-major RGB image with values in [0, 1].
struct Image {
  int width = 0, height = 0;
  std::vector<Vec3> px;

  Image() = default;
  Image(int w, int h, const Vec3& fill = Vec3::Zero())
      : width(w), height(h), px(static_cast<size_t>(w) * h, fill) {}

  Vec3& at(int x, int y) { return px[static_cast<size_t>(y) * width + x]; }
  const Vec3& at(int x, int y) const { return px[static_cast<size_t>(y) * width + x]; }

  /// Bilinear sample at a continuous pixel position, clamped to the border.
  Vec3 sample(double u, double v) const;
};

/// Row-major scalar grid (depth buffers, opacity accumulation).
struct Grid {
  int width = 0, height = 0;
  std::vector<double> v;

  Grid() = default;
  Grid(int w, int h, double fill = 0.0)
      : width(w), height(h), v(static_cast<size_t>(w) * h, fill) {}

  double& at(int x, int y) { return v[static_cast<size_t>(y) * width + x]; }
  double at(int x, int y) const { return v[static_cast<size_t>(y) * width + x]; }
};

/// One time-aligned sensor bundle.
struct Frame {
  int index = 0;
  double timestamp = 0.0;
  Image image;
  PointCloud cloud;    // LiDAR frame
  Grid depth;          // metric camera-frame z from the LiDAR projection, 0 = no return
  PoseSE3 pose_guess;  // camera-to-world prior for tracking
};

}  // namespace gslam
