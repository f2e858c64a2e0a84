#pragma once

#include "gslam/core/camera.hpp"
#include "gslam/ingest/frame.hpp"

namespace gslam {

/// Project a LiDAR scan into a camera-frame depth image. Pixels hit by
/// several points keep the nearest return; untouched pixels stay 0.
Grid project_to_depth(const PointCloud& cloud, const CameraModel& cam);

}  // namespace gslam
