#include "gslam/reference/naive_renderer.hpp"

#include <algorithm>
#include <cmath>

namespace gslam::reference {

namespace {

struct PixelHit {
  double a;
  Vec3 color;
  double depth;
};

struct FlatSplat {
  int prim;
  double depth;
  Vec2 center;
  Mat2 inv_cov;
};

std::vector<FlatSplat> project_all(const std::vector<GaussianPrimitive>& prims,
                                   const PoseSE3& cam_pose, const CameraModel& cam) {
  const PoseSE3 w2c = cam_pose.inverse();
  const Mat3 R_cw = w2c.rotation_matrix();
  std::vector<FlatSplat> out;
  for (size_t i = 0; i < prims.size(); ++i) {
    const GaussianPrimitive& g = prims[i];
    const Vec3 mu = R_cw * g.mean + w2c.translation();
    if (mu.z() <= render_detail::kZNear) continue;
    const double z = mu.z();
    Eigen::Matrix<double, 2, 3> J;
    J << cam.fx / z, 0, -cam.fx * mu.x() / (z * z), 0, cam.fy / z, -cam.fy * mu.y() / (z * z);
    const Mat3 sigma_c = R_cw * covariance_of(g) * R_cw.transpose();
    const Mat2 cov2 = J * sigma_c * J.transpose();
    if (!(cov2.determinant() > 0.0) || cov2(0, 0) <= 0.0 || cov2(1, 1) <= 0.0) continue;
    out.push_back({static_cast<int>(i), z,
                   Vec2(cam.fx * mu.x() / z + cam.cx, cam.fy * mu.y() / z + cam.cy),
                   cov2.inverse()});
  }
  std::sort(out.begin(), out.end(), [](const FlatSplat& a, const FlatSplat& b) {
    return a.depth < b.depth || (a.depth == b.depth && a.prim < b.prim);
  });
  return out;
}

// Contributions at one pixel, front to back, honoring the transmittance stop.
std::vector<PixelHit> gather(const std::vector<FlatSplat>& splats,
                             const std::vector<GaussianPrimitive>& prims, double px,
                             double py) {
  std::vector<PixelHit> hits;
  double transmittance = 1.0;
  for (const FlatSplat& s : splats) {
    if (transmittance < render_detail::kMinTransmittance) break;
    const Vec2 d(px - s.center.x(), py - s.center.y());
    const double m2 = d.dot(s.inv_cov * d);
    if (m2 > render_detail::kMahalanobisCutoff) continue;
    // same cosine-tapered Gaussian footprint as the production kernel, restated
    double w = 1.0;
    if (m2 > render_detail::kTaperStart)
      w = 0.5 * (1.0 + std::cos(M_PI * (m2 - render_detail::kTaperStart) /
                                (render_detail::kMahalanobisCutoff -
                                 render_detail::kTaperStart)));
    const double a = prims[s.prim].opacity * std::exp(-0.5 * m2) * w;
    hits.push_back({a, prims[s.prim].color, s.depth});
    transmittance *= 1.0 - a;
  }
  return hits;
}

}  // namespace

RenderBuffer naive_render(const std::vector<GaussianPrimitive>& prims, const PoseSE3& cam_pose,
                          const CameraModel& cam) {
  RenderBuffer buf;
  buf.color = Image(cam.width, cam.height);
  buf.depth = Grid(cam.width, cam.height);
  buf.alpha_accum = Grid(cam.width, cam.height);
  const auto splats = project_all(prims, cam_pose, cam);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      double t = 1.0;
      Vec3 color = Vec3::Zero();
      double depth = 0.0, alpha = 0.0;
      for (const PixelHit& h : gather(splats, prims, x, y)) {
        color += h.color * h.a * t;
        depth += h.depth * h.a * t;
        alpha += h.a * t;
        t *= 1.0 - h.a;
      }
      buf.color.at(x, y) = color;
      buf.depth.at(x, y) = depth;
      buf.alpha_accum.at(x, y) = alpha;
    }
  }
  return buf;
}

RenderBuffer naive_render_back_to_front(const std::vector<GaussianPrimitive>& prims,
                                        const PoseSE3& cam_pose, const CameraModel& cam) {
  RenderBuffer buf;
  buf.color = Image(cam.width, cam.height);
  buf.depth = Grid(cam.width, cam.height);
  buf.alpha_accum = Grid(cam.width, cam.height);
  const auto splats = project_all(prims, cam_pose, cam);
  for (int y = 0; y < cam.height; ++y) {
    for (int x = 0; x < cam.width; ++x) {
      const auto hits = gather(splats, prims, x, y);
      Vec3 color = Vec3::Zero();
      double depth = 0.0, alpha = 0.0;
      for (auto it = hits.rbegin(); it != hits.rend(); ++it) {
        color = it->color * it->a + (1.0 - it->a) * color;
        depth = it->depth * it->a + (1.0 - it->a) * depth;
        alpha = it->a + (1.0 - it->a) * alpha;
      }
      buf.color.at(x, y) = color;
      buf.depth.at(x, y) = depth;
      buf.alpha_accum.at(x, y) = alpha;
    }
  }
  return buf;
}

}  // namespace gslam::reference
