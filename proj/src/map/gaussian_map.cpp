#include "gslam/map/gaussian_map.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "gslam/core/parallel.hpp"
#include "gslam/core/rng.hpp"

namespace gslam {

namespace {

// Deterministic unit vector perpendicular to v.
Vec3 stable_perpendicular(const Vec3& v) {
  int k;
  v.cwiseAbs().minCoeff(&k);
  return v.cross(Vec3::Unit(k)).normalized();
}

// Axis order (along, perp1, perp2) by ascending scale, ties by index.
std::array<int, 3> axes_by_scale(const GaussianPrimitive& g) {
  std::array<int, 3> order = {0, 1, 2};
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return g.log_scales[a] < g.log_scales[b]; });
  return order;
}

// (x - mu)^T Sigma'^-1 (x - mu) without materializing Sigma'.
double exact_quad(const GaussianPrimitive& g, const Vec3& x) {
  const auto order = axes_by_scale(g);
  const Mat3 R = g.rotation.toRotationMatrix();
  const Vec3 s = g.scales();
  const Vec3 d = x - g.mean;
  const double l0 = d.dot(g.normal_sign * R.col(order[0]));
  const double l1 = d.dot(R.col(order[1]));
  const double l2 = d.dot(R.col(order[2]));
  const double sa = s[order[0]], sp1 = s[order[1]], sp2 = s[order[2]];
  return l0 * l0 + sa / sp1 * l1 * l1 + sa / sp2 * l2 * l2;
}

// Simplified tracking-time quadratic form.
double fast_quad(const GaussianPrimitive& g, const Vec3& x) {
  const auto order = axes_by_scale(g);
  const Vec3 s = g.scales();
  const double sa = s[order[0]], sp1 = s[order[1]], sp2 = s[order[2]];
  const double along = g.normal().dot(x - g.mean);
  return sp1 * sp2 / (sa * sa) * along * along;
}

}  // namespace

Mat3 reconstruct_covariance(const GaussianPrimitive& g) {
  const auto order = axes_by_scale(g);
  const Mat3 R = g.rotation.toRotationMatrix();
  const Vec3 s = g.scales();
  Mat3 D;
  D.col(0) = g.normal_sign * R.col(order[0]);
  D.col(1) = R.col(order[1]);
  D.col(2) = R.col(order[2]);
  const Vec3 diag(1.0, s[order[1]] / s[order[0]], s[order[2]] / s[order[0]]);
  Mat3 sigma = D * diag.asDiagonal() * D.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

int GaussianMap::add(const GaussianPrimitive& g, const PrimitiveMeta& m) {
  prims_.push_back(g);
  meta_.push_back(m);
  mark_dirty();
  return static_cast<int>(prims_.size()) - 1;
}

int GaussianMap::insert_keyframe_points(const Frame& frame, const PoseSE3& world_pose,
                                        const CameraModel& cam, const InsertOptions& opts) {
  opts_ = opts;
  const int event = events_++;
  const PoseSE3 lidar_to_world = world_pose * cam.T_cam_lidar;
  const Vec3 cam_center = world_pose.translation();

  int inserted = 0;
  for (size_t i = 0; i < frame.cloud.size(); ++i) {
    if (frame.cloud.has_normals() && !frame.cloud.normal_valid[i]) continue;
    const Vec3 p_cam = cam.T_cam_lidar * frame.cloud.points[i];
    const auto px = cam.project(p_cam);
    if (!px || !cam.in_image(*px)) continue;

    GaussianPrimitive g;
    g.mean = lidar_to_world * frame.cloud.points[i];
    g.color = frame.image.sample(px->x(), px->y());
    g.opacity = opts.init_opacity;
    g.reliable = true;
    g.birth_frame = frame.index;

    const double sigma_t = p_cam.z() / cam.fx;  // one-pixel footprint at this depth
    const double sigma_r = opts.ray_stretch * sigma_t;
    const Vec3 ray = (g.mean - cam_center).normalized();

    // Tangential axis from the point normal where possible, so the shortest
    // axis starts out along the surface normal's component across the ray.
    Vec3 t1;
    if (frame.cloud.has_normals()) {
      const Vec3 n_world =
          world_pose.rotation() * (cam.T_cam_lidar.rotation() * frame.cloud.normals[i]);
      const Vec3 rejected = n_world - n_world.dot(ray) * ray;
      t1 = rejected.norm() > 1e-8 ? rejected.normalized() : stable_perpendicular(ray);
    } else {
      t1 = stable_perpendicular(ray);
    }
    const Vec3 t2 = ray.cross(t1).normalized();

    Mat3 R;
    R.col(0) = t1;
    R.col(1) = t2;
    R.col(2) = ray;
    g.rotation = Quat(R).normalized();
    g.log_scales = Vec3(std::log(sigma_t), std::log(sigma_t), std::log(sigma_r));
    g.clamp_scales();
    g.normal_sign = 1.0;

    prims_.push_back(g);
    meta_.push_back({event, 0, false});
    ++inserted;
  }
  mark_dirty();
  return inserted;
}

int GaussianMap::init_skybox(int n, double radius, uint64_t seed) {
  Rng rng(seed);
  const double sigma_t = radius / std::sqrt(static_cast<double>(std::max(n, 1)));
  const double sigma_r = std::max(sigma_t / 20.0, kScaleFloor);
  prims_.reserve(prims_.size() + n);
  meta_.reserve(meta_.size() + n);
  for (int i = 0; i < n; ++i) {
    const double z = rng.uniform();  // upper hemisphere, uniform in area
    const double phi = 2.0 * M_PI * rng.uniform();
    const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
    const Vec3 dir(s * std::cos(phi), s * std::sin(phi), z);

    GaussianPrimitive g;
    g.mean = radius * dir;
    g.color = Vec3(0.53, 0.81, 0.92);
    g.opacity = 0.8;
    g.reliable = false;
    g.birth_frame = 0;

    const Vec3 inward = -dir;  // shortest axis faces the scene
    const Vec3 t1 = stable_perpendicular(inward);
    const Vec3 t2 = inward.cross(t1).normalized();
    Mat3 R;
    R.col(0) = inward;
    R.col(1) = t1;
    R.col(2) = t2;
    g.rotation = Quat(R).normalized();
    g.log_scales = Vec3(std::log(sigma_r), std::log(sigma_t), std::log(sigma_t));
    g.clamp_scales();
    g.normal_sign = 1.0;

    prims_.push_back(g);
    meta_.push_back({-1, 0, true});
  }
  mark_dirty();
  return n;
}

int GaussianMap::prune(double opacity_floor, int stale_window) {
  // Window members above the median weight are protected.
  const auto& sub = submap_indices();
  std::vector<double> weights(submap_weights_);
  double median_w = 0.0;
  if (!weights.empty()) {
    std::nth_element(weights.begin(), weights.begin() + weights.size() / 2, weights.end());
    median_w = weights[weights.size() / 2];
  }
  std::vector<uint8_t> protected_flag(prims_.size(), 0);
  for (size_t pos = 0; pos < sub.size(); ++pos) {
    const bool recent = meta_[sub[pos]].insertion_event >= events_ - stale_window;
    if (recent && submap_weights_[pos] > median_w) protected_flag[sub[pos]] = 1;
  }

  int removed = 0;
  size_t w = 0;
  for (size_t i = 0; i < prims_.size(); ++i) {
    const bool removable = prims_[i].opacity < opacity_floor && meta_[i].opt_rounds >= 1 &&
                           !protected_flag[i];
    if (removable) {
      ++removed;
      continue;
    }
    prims_[w] = prims_[i];
    meta_[w] = meta_[i];
    ++w;
  }
  prims_.resize(w);
  meta_.resize(w);
  if (removed > 0) mark_dirty();
  return removed;
}

const std::vector<int>& GaussianMap::submap_indices() const {
  if (dirty_) rebuild_submap();
  return submap_;
}

const KdTree3& GaussianMap::submap_tree() const {
  if (dirty_) rebuild_submap();
  return submap_tree_;
}

double GaussianMap::submap_radius() const {
  if (dirty_) rebuild_submap();
  return submap_radius_;
}

double GaussianMap::submap_weight(int submap_pos) const {
  if (dirty_) rebuild_submap();
  return submap_weights_[submap_pos];
}

void GaussianMap::rebuild_submap() const {
  submap_.clear();
  for (size_t i = 0; i < prims_.size(); ++i) {
    const PrimitiveMeta& m = meta_[i];
    if (m.sky || m.insertion_event < 0) continue;
    if (m.insertion_event >= events_ - opts_.window_events)
      submap_.push_back(static_cast<int>(i));
  }

  std::vector<Vec3> means(submap_.size());
  for (size_t i = 0; i < submap_.size(); ++i) means[i] = prims_[submap_[i]].mean;
  submap_tree_.build(std::move(means));

  // Neighborhood radius: radius_factor x median nearest-neighbor spacing.
  submap_radius_ = 0.0;
  if (submap_.size() >= 2) {
    std::vector<double> nn(submap_.size());
    parallel_for(static_cast<std::ptrdiff_t>(submap_.size()), [&](std::ptrdiff_t i) {
      std::vector<int> idx;
      std::vector<double> d2;
      submap_tree_.knn(prims_[submap_[i]].mean, 2, idx, d2);
      nn[i] = d2.size() > 1 ? std::sqrt(d2[1]) : 0.0;
    });
    std::nth_element(nn.begin(), nn.begin() + nn.size() / 2, nn.end());
    submap_radius_ = opts_.radius_factor * nn[nn.size() / 2];
  }

  // Cache per-member weights over the submap view.
  submap_weights_.assign(submap_.size(), 0.0);
  const double r = submap_radius_;
  parallel_for(static_cast<std::ptrdiff_t>(submap_.size()), [&](std::ptrdiff_t pos) {
    const GaussianPrimitive& g = prims_[submap_[pos]];
    std::vector<int> nbr;
    submap_tree_.radius(g.mean, r, nbr);

    const Vec3 n0 = g.normal();
    Vec3 n_avg = Vec3::Zero();
    double rho = 0.0;
    for (int j : nbr) {
      const GaussianPrimitive& h = prims_[submap_[j]];
      Vec3 nj = h.normal();
      if (nj.dot(n0) < 0.0) nj = -nj;
      n_avg += nj;
      rho += h.opacity * std::exp(-0.5 * exact_quad(h, g.mean));
    }
    double consistency = 1.0;
    if (n_avg.norm() > 1e-12) consistency = n0.dot(n_avg.normalized());
    submap_weights_[pos] = std::max(0.0, consistency * rho);
  });

  dirty_ = false;
}

double GaussianMap::density(const DensityQuery& q, DensityMode mode) const {
  if (prims_.empty() || q.radius <= 0.0) return 0.0;
  double rho = 0.0;
  for (const GaussianPrimitive& g : prims_) {
    if ((g.mean - q.x).norm() > q.radius) continue;
    const double quad = mode == DensityMode::exact ? exact_quad(g, q.x) : fast_quad(g, q.x);
    rho += g.opacity * std::exp(-0.5 * quad);
  }
  return rho;
}

double GaussianMap::weight(int prim_index, double radius) const {
  const GaussianPrimitive& g = prims_[prim_index];
  const Vec3 n0 = g.normal();
  Vec3 n_avg = Vec3::Zero();
  int count = 0;
  for (const GaussianPrimitive& h : prims_) {
    if ((h.mean - g.mean).norm() > radius) continue;
    Vec3 nj = h.normal();
    if (nj.dot(n0) < 0.0) nj = -nj;
    n_avg += nj;
    ++count;
  }
  double consistency = 1.0;
  if (count > 0 && n_avg.norm() > 1e-12) consistency = n0.dot(n_avg.normalized());
  const double rho = density({g.mean, radius}, DensityMode::exact);
  return std::max(0.0, consistency * rho);
}

}  // namespace gslam
