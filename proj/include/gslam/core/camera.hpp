#pragma once

#include <optional>

#include "gslam/core/pose.hpp"

namespace gslam {

/// Pinhole intrinsics plus the LiDAR-to-camera extrinsic.
struct CameraModel {
  double fx = 0, fy = 0, cx = 0, cy = 0;
  int width = 0, height = 0;
  PoseSE3 T_cam_lidar;  // maps LiDAR-frame points into the camera frame

  bool valid() const { return fx > 0 && fy > 0 && width > 0 && height > 0; }

  /// Perspective projection of a camera-frame point; empty when behind the camera.
  std::optional<Vec2> project(const Vec3& p_cam) const {
    if (p_cam.z() <= 0.0) return std::nullopt;
    return Vec2(fx * p_cam.x() / p_cam.z() + cx, fy * p_cam.y() / p_cam.z() + cy);
  }

  bool in_image(const Vec2& px) const {
    return px.x() >= 0.0 && px.x() < width && px.y() >= 0.0 && px.y() < height;
  }

  /// Unit ray through pixel (u, v) in the camera frame.
  Vec3 ray(double u, double v) const {
    return Vec3((u - cx) / fx, (v - cy) / fy, 1.0).normalized();
  }
};

}  // namespace gslam
