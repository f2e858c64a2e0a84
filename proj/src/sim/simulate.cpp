#include "gslam/sim/simulate.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "gslam/core/parallel.hpp"
#include "gslam/core/rng.hpp"
#include "gslam/io/image_io.hpp"
#include "gslam/io/text_formats.hpp"
#include "gslam/render/renderer.hpp"

namespace fs = std::filesystem;

namespace gslam::sim {

namespace {

// Look-along orientation: z forward, y toward world +y (down).
Quat orientation_along(const Vec3& forward) {
  const Vec3 f = forward.normalized();
  Vec3 down(0, 1, 0);
  if (std::abs(f.dot(down)) > 0.99) down = Vec3(0, 0, 1);
  const Vec3 x = down.cross(f).normalized();
  const Vec3 y = f.cross(x).normalized();
  Mat3 R;
  R.col(0) = x;
  R.col(1) = y;
  R.col(2) = f;
  return Quat(R).normalized();
}

}  // namespace

PoseSE3 TrajectorySpec::pose_at(int i) const {
  const double s = frames > 1 ? static_cast<double>(i) / (frames - 1) : 0.0;
  if (kind == Kind::line) {
    const Vec3 pos = start + s * (end - start);
    return {orientation_along(end - start), pos};
  }
  const double a0 = arc_start_deg * M_PI / 180.0;
  const double a = a0 + s * arc_span_deg * M_PI / 180.0;
  const Vec3 pos = center + arc_radius * Vec3(std::cos(a), 0.0, std::sin(a));
  const Vec3 tangent(-std::sin(a), 0.0, std::cos(a));
  return {orientation_along(arc_span_deg >= 0 ? tangent : Vec3(-tangent)), pos};
}

PointCloud simulate_lidar(const SceneSpec& scene, const PoseSE3& pose,
                          const LidarPattern& pattern, uint64_t frame_salt) {
  const double half_h = 0.5 * pattern.fov_h_deg * M_PI / 180.0;
  const double half_v = 0.5 * pattern.fov_v_deg * M_PI / 180.0;

  // Build the angular pattern deterministically up front.
  std::vector<Vec2> angles(pattern.rays);
  if (pattern.kind == LidarPattern::Kind::grid) {
    const int nh = std::max(
        1, static_cast<int>(std::ceil(std::sqrt(pattern.rays * pattern.fov_h_deg /
                                                std::max(pattern.fov_v_deg, 1e-6)))));
    const int nv = std::max(1, (pattern.rays + nh - 1) / nh);
    for (int i = 0; i < pattern.rays; ++i) {
      const int ix = i % nh, iy = i / nh;
      const double az = nh > 1 ? -half_h + 2.0 * half_h * ix / (nh - 1) : 0.0;
      const double el = nv > 1 ? -half_v + 2.0 * half_v * iy / (nv - 1) : 0.0;
      angles[i] = Vec2(az, el);
    }
  } else {
    Rng rng = Rng::from_keys(pattern.seed, frame_salt);
    for (int i = 0; i < pattern.rays; ++i)
      angles[i] = Vec2(rng.uniform(-half_h, half_h), rng.uniform(-half_v, half_v));
  }

  const Mat3 R = pose.rotation_matrix();
  const Vec3 origin = pose.translation();

  struct RayHit {
    uint8_t ok = 0;
    Vec3 point = Vec3::Zero();
    Vec3 normal = Vec3::Zero();
    double range = 0.0;
  };
  std::vector<RayHit> hits(pattern.rays);
  parallel_for(pattern.rays, [&](std::ptrdiff_t i) {
    const double az = angles[i].x(), el = angles[i].y();
    const Vec3 dir_s(std::sin(az) * std::cos(el), std::sin(el),
                     std::cos(az) * std::cos(el));
    const auto hit = raycast(scene, origin, R * dir_s, pattern.max_range);
    if (!hit) return;
    hits[i].ok = 1;
    hits[i].range = hit->range;
    hits[i].point = dir_s * hit->range;  // sensor frame, noiseless for now
    hits[i].normal = R.transpose() * hit->normal;
  });

  PointCloud cloud;
  Rng noise_rng = Rng::from_keys(pattern.seed ^ 0xabcdef12ULL, frame_salt);
  for (int i = 0; i < pattern.rays; ++i) {
    if (!hits[i].ok) continue;
    double range = hits[i].range;
    if (pattern.noise_sigma > 0.0) range += pattern.noise_sigma * noise_rng.gaussian();
    cloud.points.push_back(hits[i].point / hits[i].range * range);
    cloud.normals.push_back(hits[i].normal);
    cloud.normal_valid.push_back(1);
  }
  return cloud;
}

Image simulate_camera(const SceneSpec& scene, const PoseSE3& pose, const CameraModel& cam) {
  if (!scene.primitives.empty()) return render(scene.primitives, pose, cam).color;

  Image img(cam.width, cam.height, scene.background);
  const Mat3 R = pose.rotation_matrix();
  const Vec3 origin = pose.translation();
  parallel_for(static_cast<std::ptrdiff_t>(cam.height), [&](std::ptrdiff_t y) {
    for (int x = 0; x < cam.width; ++x) {
      const Vec3 dir = R * cam.ray(x, y);
      const auto hit = raycast(scene, origin, dir, 1e6);
      if (hit) img.at(x, static_cast<int>(y)) = scene.surfaces[hit->surface].albedo_at(hit->point);
    }
  });
  return img;
}

int generate_sequence(const SceneSpec& scene, const TrajectorySpec& traj,
                      const CameraModel& cam, const LidarPattern& pattern,
                      const std::string& out_dir) {
  fs::create_directories(fs::path(out_dir) / "images");
  fs::create_directories(fs::path(out_dir) / "scans");
  io::write_calib((fs::path(out_dir) / "calib.txt").string(), cam);

  std::vector<io::TimedPose> gt;
  char name[64];
  for (int i = 0; i < traj.frames; ++i) {
    const double ts = traj.t0 + traj.dt * i;
    const PoseSE3 cam_pose = traj.pose_at(i);
    const PoseSE3 lidar_pose = cam_pose * cam.T_cam_lidar;  // sensor-to-world

    std::snprintf(name, sizeof(name), "%.6f", ts);
    io::write_ppm((fs::path(out_dir) / "images" / (std::string(name) + ".ppm")).string(),
                  simulate_camera(scene, cam_pose, cam));

    PointCloud cloud = simulate_lidar(scene, lidar_pose, pattern, static_cast<uint64_t>(i));
    io::write_xyz((fs::path(out_dir) / "scans" / (std::string(name) + ".xyz")).string(),
                  cloud);
    gt.push_back({ts, cam_pose});
  }
  io::write_tum((fs::path(out_dir) / "gt_trajectory.txt").string(), gt);
  return traj.frames;
}

}  // namespace gslam::sim
