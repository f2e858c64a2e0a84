#pragma once

#include <random>

#include "gslam/core/camera.hpp"
#include "gslam/core/gaussian.hpp"
#include "gslam/core/pose.hpp"

namespace test_helpers {

using gslam::CameraModel;
using gslam::GaussianPrimitive;
using gslam::Mat3;
using gslam::PoseSE3;
using gslam::Quat;
using gslam::Vec3;

inline Vec3 random_vec(std::mt19937& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> d(lo, hi);
  return {d(rng), d(rng), d(rng)};
}

inline Quat random_quat(std::mt19937& rng) {
  std::normal_distribution<double> d(0.0, 1.0);
  Quat q(d(rng), d(rng), d(rng), d(rng));
  q.normalize();
  return q;
}

inline PoseSE3 random_pose(std::mt19937& rng, double t_range = 1.0) {
  return {random_quat(rng), random_vec(rng, -t_range, t_range)};
}

inline GaussianPrimitive random_primitive(std::mt19937& rng, double extent = 1.0) {
  GaussianPrimitive g;
  g.mean = random_vec(rng, -extent, extent);
  g.rotation = random_quat(rng);
  std::uniform_real_distribution<double> s(-2.5, 0.5);
  g.log_scales = Vec3(s(rng), s(rng), s(rng));
  std::uniform_real_distribution<double> a(0.1, 0.95);
  g.opacity = a(rng);
  std::uniform_real_distribution<double> c(0.0, 1.0);
  g.color = Vec3(c(rng), c(rng), c(rng));
  g.reliable = true;
  return g;
}

inline CameraModel test_camera(int w = 64, int h = 48, double hfov_deg = 70.0) {
  CameraModel cam;
  cam.width = w;
  cam.height = h;
  cam.fx = w / (2.0 * std::tan(hfov_deg * M_PI / 360.0));
  cam.fy = cam.fx;
  cam.cx = w / 2.0;
  cam.cy = h / 2.0;
  return cam;
}

}  // namespace test_helpers
