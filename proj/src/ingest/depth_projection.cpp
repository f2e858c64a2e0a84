#include "gslam/ingest/depth_projection.hpp"

#include <cmath>

namespace gslam {

Grid project_to_depth(const PointCloud& cloud, const CameraModel& cam) {
  Grid depth(cam.width, cam.height, 0.0);
  for (const Vec3& p : cloud.points) {
    const Vec3 pc = cam.T_cam_lidar * p;
    const auto px = cam.project(pc);
    if (!px) continue;
    const int u = static_cast<int>(std::floor(px->x()));
    const int v = static_cast<int>(std::floor(px->y()));
    if (u < 0 || u >= cam.width || v < 0 || v >= cam.height) continue;
    double& d = depth.at(u, v);
    if (d == 0.0 || pc.z() < d) d = pc.z();
  }
  return depth;
}

}  // namespace gslam
