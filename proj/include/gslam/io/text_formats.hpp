#pragma once

#include <string>
#include <vector>

#include "gslam/core/camera.hpp"
#include "gslam/core/pose.hpp"
#include "gslam/ingest/cloud.hpp"

namespace gslam::io {

/// One trajectory sample: "timestamp tx ty tz qx qy qz qw".
struct TimedPose {
  double timestamp = 0.0;
  PoseSE3 pose;
};

void write_tum(const std::string& path, const std::vector<TimedPose>& trajectory);
std::vector<TimedPose> read_tum(const std::string& path);

/// Whitespace-separated "x y z" per line, full double precision.
void write_xyz(const std::string& path, const PointCloud& cloud);
PointCloud read_xyz(const std::string& path);

/// calib.txt holds 16 numbers: K row-major (9), then the LiDAR-to-camera
/// extrinsic as tx ty tz qx qy qz qw. Image size comes from the images.
void write_calib(const std::string& path, const CameraModel& cam);
CameraModel read_calib(const std::string& path);

}  // namespace gslam::io
