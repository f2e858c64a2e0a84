#include "gslam/io/text_formats.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "gslam/core/errors.hpp"

namespace gslam::io {

void write_tum(const std::string& path, const std::vector<TimedPose>& trajectory) {
  std::ofstream out(path);
  if (!out) throw UnreadableFile(path);
  char line[256];
  for (const TimedPose& tp : trajectory) {
    const Vec3& t = tp.pose.translation();
    const Quat& q = tp.pose.rotation();
    std::snprintf(line, sizeof(line), "%.9f %.9f %.9f %.9f %.9f %.9f %.9f %.9f\n",
                  tp.timestamp, t.x(), t.y(), t.z(), q.x(), q.y(), q.z(), q.w());
    out << line;
  }
}

std::vector<TimedPose> read_tum(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UnreadableFile(path);
  std::vector<TimedPose> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ss(line);
    double ts, tx, ty, tz, qx, qy, qz, qw;
    if (!(ss >> ts >> tx >> ty >> tz >> qx >> qy >> qz >> qw)) continue;
    out.push_back({ts, PoseSE3(Quat(qw, qx, qy, qz), Vec3(tx, ty, tz))});
  }
  return out;
}

void write_xyz(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw UnreadableFile(path);
  char line[128];
  for (const Vec3& p : cloud.points) {
    std::snprintf(line, sizeof(line), "%.17g %.17g %.17g\n", p.x(), p.y(), p.z());
    out << line;
  }
}

PointCloud read_xyz(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UnreadableFile(path);
  PointCloud cloud;
  double x, y, z;
  while (in >> x >> y >> z) cloud.points.emplace_back(x, y, z);
  return cloud;
}

void write_calib(const std::string& path, const CameraModel& cam) {
  std::ofstream out(path);
  if (!out) throw UnreadableFile(path);
  char buf[512];
  std::snprintf(buf, sizeof(buf), "%.17g 0 %.17g 0 %.17g %.17g 0 0 1\n", cam.fx, cam.cx,
                cam.fy, cam.cy);
  out << buf;
  const Vec3& t = cam.T_cam_lidar.translation();
  const Quat& q = cam.T_cam_lidar.rotation();
  std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g %.17g %.17g %.17g %.17g\n", t.x(),
                t.y(), t.z(), q.x(), q.y(), q.z(), q.w());
  out << buf;
}

CameraModel read_calib(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MissingCalibration(path);
  double k[9];
  for (double& v : k)
    if (!(in >> v)) throw UnreadableFile(path + " (bad intrinsics)");
  double tx, ty, tz, qx, qy, qz, qw;
  if (!(in >> tx >> ty >> tz >> qx >> qy >> qz >> qw))
    throw UnreadableFile(path + " (bad extrinsics)");
  CameraModel cam;
  cam.fx = k[0];
  cam.cx = k[2];
  cam.fy = k[4];
  cam.cy = k[5];
  cam.T_cam_lidar = PoseSE3(Quat(qw, qx, qy, qz), Vec3(tx, ty, tz));
  return cam;
}

}  // namespace gslam::io
