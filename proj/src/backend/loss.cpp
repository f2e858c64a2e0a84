#include "gslam/backend/loss.hpp"

#include <cmath>

#include "gslam/core/parallel.hpp"

namespace gslam {

namespace {

double sign(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

}  // namespace

std::vector<int> visible_primitives(const GaussianMap& map, const PoseSE3& pose,
                                    const CameraModel& cam) {
  const PoseSE3 w2c = pose.inverse();
  std::vector<int> out;
  for (size_t i = 0; i < map.size(); ++i) {
    const Vec3 p_cam = w2c * map.primitive(static_cast<int>(i)).mean;
    if (p_cam.z() <= render_detail::kZNear) continue;
    const auto px = cam.project(p_cam);
    if (px && cam.in_image(*px)) out.push_back(static_cast<int>(i));
  }
  return out;
}

LossBreakdown compute_loss(const GaussianMap& map, const KeyframeRecord& kf,
                           const CameraModel& cam, double lambda1, double lambda2,
                           RenderBuffer* buffers) {
  LossBreakdown loss;
  loss.lambda1 = lambda1;
  loss.lambda2 = lambda2;

  RenderBuffer local;
  RenderBuffer& buf = buffers ? *buffers : local;
  buf = render(map.primitives(), kf.pose, cam);

  const size_t n_px = buf.color.px.size();
  struct Acc {
    double pho = 0, geo = 0;
    long geo_count = 0;
  };
  const Acc acc = chunked_reduce<Acc>(
      static_cast<std::ptrdiff_t>(n_px), 4096,
      [&](std::ptrdiff_t lo, std::ptrdiff_t hi, Acc& a) {
        for (std::ptrdiff_t i = lo; i < hi; ++i) {
          a.pho += (buf.color.px[i] - kf.frame.image.px[i]).cwiseAbs().sum();
          const double lidar = kf.frame.depth.v[i];
          if (lidar > 0.0) {
            a.geo += std::abs(buf.depth.v[i] - lidar);
            ++a.geo_count;
          }
        }
      },
      [](Acc& a, const Acc& b) {
        a.pho += b.pho;
        a.geo += b.geo;
        a.geo_count += b.geo_count;
      });

  loss.e_pho = acc.pho / (3.0 * static_cast<double>(n_px));
  loss.e_geo = acc.geo_count > 0 ? acc.geo / static_cast<double>(acc.geo_count) : 0.0;

  const std::vector<int> visible = visible_primitives(map, kf.pose, cam);
  if (!visible.empty()) {
    double sum = 0.0;
    for (int idx : visible) sum += map.primitive(idx).smallest_scale();
    loss.e_normal = sum / static_cast<double>(visible.size());
  }

  loss.total = loss.recompute_total();
  return loss;
}

void loss_upstream(const RenderBuffer& buffers, const KeyframeRecord& kf, double lambda1,
                   Image& d_color, Grid& d_depth) {
  const int w = buffers.color.width, h = buffers.color.height;
  d_color = Image(w, h);
  d_depth = Grid(w, h);
  const size_t n_px = buffers.color.px.size();
  const double pho_scale = (1.0 - lambda1) / (3.0 * static_cast<double>(n_px));

  long geo_count = 0;
  for (size_t i = 0; i < n_px; ++i)
    if (kf.frame.depth.v[i] > 0.0) ++geo_count;
  const double geo_scale = geo_count > 0 ? lambda1 / static_cast<double>(geo_count) : 0.0;

  parallel_for(static_cast<std::ptrdiff_t>(n_px), [&](std::ptrdiff_t i) {
    const Vec3 diff = buffers.color.px[i] - kf.frame.image.px[i];
    d_color.px[i] = pho_scale * Vec3(sign(diff.x()), sign(diff.y()), sign(diff.z()));
    const double lidar = kf.frame.depth.v[i];
    d_depth.v[i] = lidar > 0.0 ? geo_scale * sign(buffers.depth.v[i] - lidar) : 0.0;
  });
}

}  // namespace gslam
