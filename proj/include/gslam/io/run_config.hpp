#pragma once

#include <array>
#include <string>
#include <vector>

namespace gslam::io {

/// Every pipeline tunable, serialized as flat "key = value" text with '#'
/// comments. Parsing then serializing yields an identical string.
struct RunConfig {
  // tracking
  double lambda_r = 0.1;
  double max_dist = 1.0;
  int track_max_iters = 30;
  double track_tol = 1e-5;
  int min_inliers = 50;
  double huber_factor = 3.0;
  int normal_k = 10;
  bool density_fast = false;
  double keyframe_covis = 0.85;
  // map
  int window_events = 10;
  double radius_factor = 3.0;
  double ray_stretch = 2.0;
  double init_opacity = 0.5;
  int skybox_count = 1000;
  double skybox_radius = 50.0;
  double opacity_floor = 0.05;
  int stale_window = 10;
  // back end
  double lambda1 = 0.5;
  double lambda2 = 0.01;
  int batch_keyframes = 5;
  int pose_iters = 10;
  int map_iters = 25;
  double pose_step = 1e-2;
  double lr_mean = 1.6e-4;
  double lr_log_scales = 5e-3;
  double lr_rotation = 1e-3;
  double lr_opacity = 5e-2;
  double lr_color = 2.5e-3;
  // run
  long seed = 0;
  int threads = 1;
  double pair_tolerance = 0.05;

  std::string serialize() const;
  static RunConfig parse(const std::string& text);
  static RunConfig load(const std::string& path);
  void save(const std::string& path) const;

  /// Set one field from its text form; throws on unknown keys or bad values.
  void set(const std::string& key, const std::string& value);

  /// (key, current value, default value) for every field, in serialization order.
  std::vector<std::array<std::string, 3>> fields() const;
};

}  // namespace gslam::io
