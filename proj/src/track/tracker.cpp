#include "gslam/track/tracker.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "gslam/core/errors.hpp"
#include "gslam/core/parallel.hpp"

namespace gslam {

std::vector<Correspondence> associate(const std::vector<Vec3>& points_world,
                                      const std::vector<Vec3>& normals_world,
                                      const std::vector<uint8_t>& valid,
                                      const GaussianMap& map, double max_dist) {
  const auto& submap = map.submap_indices();
  const KdTree3& tree = map.submap_tree();
  std::vector<Correspondence> out(points_world.size());

  parallel_for(static_cast<std::ptrdiff_t>(points_world.size()), [&](std::ptrdiff_t i) {
    out[i].point = -1;
    if (!valid.empty() && !valid[i]) return;
    double d2 = 0.0;
    const int nn = tree.nearest(points_world[i], &d2);
    if (nn < 0 || d2 > max_dist * max_dist) return;
    const GaussianPrimitive& g = map.primitive(submap[nn]);
    out[i].point = static_cast<int>(i);
    out[i].primitive = nn;
    out[i].residual = normals_world[i].dot(points_world[i] - g.mean);
    out[i].weight = map.submap_weight(nn);
  });

  std::erase_if(out, [](const Correspondence& c) { return c.point < 0; });
  if (out.empty()) throw NoCorrespondences();
  return out;
}

double tracking_cost(const std::vector<TrackingPair>& pairs, const PoseSE3& pose,
                     double lambda_r) {
  const Mat3 R = pose.rotation_matrix();
  double cost = 0.0;
  for (const TrackingPair& p : pairs) {
    const Vec3 n_w = R * p.normal;
    const double r = n_w.dot(pose * p.point - p.target);
    cost += p.weight * r * r;
    cost += lambda_r * std::abs(1.0 - n_w.dot(p.target_normal));
  }
  return cost;
}

Vec6 tracking_cost_gradient(const std::vector<TrackingPair>& pairs, const PoseSE3& pose,
                            double lambda_r) {
  const Mat3 R = pose.rotation_matrix();
  Vec6 grad = Vec6::Zero();
  for (const TrackingPair& p : pairs) {
    const Vec3 n_w = R * p.normal;
    const double r = n_w.dot(pose * p.point - p.target);
    // Point and normal co-rotate, so the rotational part reduces to -n x mu.
    Vec6 J;
    J.head<3>() = n_w;
    J.tail<3>() = -n_w.cross(p.target);
    grad += 2.0 * p.weight * r * J;

    const double s = 1.0 - n_w.dot(p.target_normal);
    const double sgn = s >= 0.0 ? 1.0 : -1.0;
    grad.tail<3>() += lambda_r * sgn * (-n_w.cross(p.target_normal));
  }
  return grad;
}

namespace {

struct NormalEq {
  Mat6 H = Mat6::Zero();
  Vec6 g = Vec6::Zero();
};

}  // namespace

TrackingResult track_frame(const PointCloud& cloud, const GaussianMap& map,
                           const PoseSE3& initial_pose, const TrackingParams& params) {
  TrackingResult result;
  result.pose = initial_pose;

  const size_t n = cloud.size();
  std::vector<Vec3> pw(n), nw(n);
  std::vector<TrackingPair> pairs;

  for (int iter = 0; iter < params.max_iterations; ++iter) {
    const Mat3 R = result.pose.rotation_matrix();
    parallel_for(static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t i) {
      pw[i] = result.pose * cloud.points[i];
      nw[i] = R * cloud.normals[i];
    });

    const double gate = iter >= 10 ? 0.5 * params.max_dist : params.max_dist;
    std::vector<Correspondence> corr;
    try {
      corr = associate(pw, nw, cloud.normal_valid, map, gate);
    } catch (const NoCorrespondences&) {
      throw TrackingLost("no correspondences");
    }
    result.inlier_count = static_cast<int>(corr.size());
    if (result.inlier_count < params.min_inliers)
      throw TrackingLost("inliers below minimum");

    pairs.clear();
    pairs.reserve(corr.size());
    const auto& submap = map.submap_indices();
    for (const Correspondence& c : corr) {
      const GaussianPrimitive& g = map.primitive(submap[c.primitive]);
      pairs.push_back({cloud.points[c.point], cloud.normals[c.point], g.mean, g.normal(),
                       c.weight});
    }

    // Huber scale from this iteration's residual distribution.
    std::vector<double> abs_r(corr.size());
    for (size_t i = 0; i < corr.size(); ++i) abs_r[i] = std::abs(corr[i].residual);
    std::nth_element(abs_r.begin(), abs_r.begin() + abs_r.size() / 2, abs_r.end());
    const double huber = std::max(params.huber_factor * abs_r[abs_r.size() / 2], 1e-12);

    const NormalEq eq = chunked_reduce<NormalEq>(
        static_cast<std::ptrdiff_t>(pairs.size()), 512,
        [&](std::ptrdiff_t lo, std::ptrdiff_t hi, NormalEq& acc) {
          for (std::ptrdiff_t i = lo; i < hi; ++i) {
            const TrackingPair& p = pairs[i];
            const Vec3 n_w = R * p.normal;
            const double r = n_w.dot(result.pose * p.point - p.target);
            const double w_huber = std::abs(r) <= huber ? 1.0 : huber / std::abs(r);
            const double w = p.weight * w_huber;
            Vec6 J;
            J.head<3>() = n_w;
            J.tail<3>() = -n_w.cross(p.target);
            acc.H += w * J * J.transpose();
            acc.g += w * r * J;

            const double s = 1.0 - n_w.dot(p.target_normal);
            const double sgn = s >= 0.0 ? 1.0 : -1.0;
            const Vec3 u = -n_w.cross(p.target_normal);
            acc.H.bottomRightCorner<3, 3>() += 0.5 * params.lambda_r * u * u.transpose();
            acc.g.tail<3>() += 0.5 * params.lambda_r * sgn * u;
          }
        },
        [](NormalEq& a, const NormalEq& b) {
          a.H += b.H;
          a.g += b.g;
        });

    if (Eigen::FullPivLU<Mat6>(eq.H).rank() < 6)
      throw TrackingLost("rank-deficient normal equations");

    const Vec6 delta = eq.H.ldlt().solve(-eq.g);
    result.pose = PoseSE3::exp(delta) * result.pose;
    result.iterations = iter + 1;
    if (delta.norm() < params.update_tol) {
      result.converged = true;
      break;
    }
  }

  result.final_cost = tracking_cost(pairs, result.pose, params.lambda_r);
  return result;
}

double covisibility(const GaussianMap& map, const PoseSE3& pose_a, const PoseSE3& pose_b,
                    const CameraModel& cam) {
  const auto& submap = map.submap_indices();
  const PoseSE3 inv_a = pose_a.inverse();
  const PoseSE3 inv_b = pose_b.inverse();
  int both = 0, either = 0;
  for (int idx : submap) {
    const Vec3& mu = map.primitive(idx).mean;
    const auto pa = cam.project(inv_a * mu);
    const auto pb = cam.project(inv_b * mu);
    const bool in_a = pa && cam.in_image(*pa);
    const bool in_b = pb && cam.in_image(*pb);
    if (in_a && in_b) ++both;
    if (in_a || in_b) ++either;
  }
  if (either == 0) return 1.0;
  return static_cast<double>(both) / static_cast<double>(either);
}

}  // namespace gslam
