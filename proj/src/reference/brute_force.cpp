#include "gslam/reference/brute_force.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "gslam/map/gaussian_map.hpp"

namespace gslam::reference {

int brute_nearest(const std::vector<Vec3>& points, const Vec3& query) {
  int best = -1;
  double best_d2 = std::numeric_limits<double>::max();
  for (size_t i = 0; i < points.size(); ++i) {
    const double d2 = (points[i] - query).squaredNorm();
    if (d2 < best_d2) {
      best_d2 = d2;
      best = static_cast<int>(i);
    }
  }
  return best;
}

std::vector<int> brute_knn(const std::vector<Vec3>& points, const Vec3& query, int k) {
  std::vector<int> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    const double da = (points[a] - query).squaredNorm();
    const double db = (points[b] - query).squaredNorm();
    return da < db || (da == db && a < b);
  });
  order.resize(std::min<size_t>(order.size(), static_cast<size_t>(std::max(k, 0))));
  return order;
}

double brute_density(const std::vector<GaussianPrimitive>& prims, const Vec3& x,
                     double radius) {
  double rho = 0.0;
  for (const GaussianPrimitive& g : prims) {
    if ((g.mean - x).norm() > radius) continue;
    const Mat3 sigma = reconstruct_covariance(g);
    const Mat3 inv = Eigen::FullPivLU<Mat3>(sigma).inverse();
    const Vec3 d = x - g.mean;
    rho += g.opacity * std::exp(-0.5 * d.dot(inv * d));
  }
  return rho;
}

double point_to_plane_cost(const std::vector<Vec3>& source_points,
                           const std::vector<Vec3>& source_normals,
                           const std::vector<Vec3>& target_points, const PoseSE3& T) {
  Eigen::Matrix4d M = Eigen::Matrix4d::Identity();
  M.topLeftCorner<3, 3>() = T.rotation_matrix();
  M.topRightCorner<3, 1>() = T.translation();
  double cost = 0.0;
  for (size_t i = 0; i < source_points.size(); ++i) {
    const Eigen::Vector4d p = M * source_points[i].homogeneous();
    const Vec3 n = M.topLeftCorner<3, 3>() * source_normals[i];
    const double r = n.dot(p.head<3>() - target_points[i]);
    cost += r * r;
  }
  return cost;
}

}  // namespace gslam::reference
