#pragma once

#include <string>

#include "gslam/core/camera.hpp"
#include "gslam/ingest/cloud.hpp"
#include "gslam/ingest/frame.hpp"
#include "gslam/sim/scene.hpp"

namespace gslam::sim {

struct LidarPattern {
  enum class Kind { grid, rosette } kind = Kind::rosette;
  int rays = 2600;
  double fov_h_deg = 81.0;  // Livox-Horizon-like forward cone
  double fov_v_deg = 25.0;
  double noise_sigma = 0.0;  // range noise, scene units
  double max_range = 200.0;
  uint64_t seed = 7;
};

struct TrajectorySpec {
  enum class Kind { line, arc } kind = Kind::line;
  Vec3 start = Vec3::Zero();
  Vec3 end = Vec3(0, 0, 1);
  // arc: in the horizontal (x-z) plane around `center`
  Vec3 center = Vec3::Zero();
  double arc_radius = 2.0;
  double arc_start_deg = 0.0;
  double arc_span_deg = 90.0;
  int frames = 20;
  double dt = 0.1;
  double t0 = 0.0;

  /// Camera-to-world pose of frame i, z forward along the path, y down.
  PoseSE3 pose_at(int i) const;
};

/// Cast one scan from the sensor pose (sensor-to-world); returns points in
/// the sensor frame with ground-truth surface normals attached (oracle use;
/// the dataset writer strips them). Rays that miss are dropped.
PointCloud simulate_lidar(const SceneSpec& scene, const PoseSE3& pose,
                          const LidarPattern& pattern, uint64_t frame_salt = 0);

/// Ground-truth image: ray-cast albedo for parametric scenes, the production
/// rasterizer for Gaussian scenes.
Image simulate_camera(const SceneSpec& scene, const PoseSE3& pose, const CameraModel& cam);

/// Write a full dataset (calib.txt, images/, scans/, gt_trajectory.txt) that
/// load_sequence round-trips. Returns the frame count.
int generate_sequence(const SceneSpec& scene, const TrajectorySpec& traj,
                      const CameraModel& cam, const LidarPattern& pattern,
                      const std::string& out_dir);

}  // namespace gslam::sim
