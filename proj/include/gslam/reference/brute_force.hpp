#pragma once

#include <vector>

#include "gslam/core/gaussian.hpp"
#include "gslam/core/pose.hpp"

namespace gslam::reference {

/// Linear-scan nearest neighbor: smallest (squared distance, index).
int brute_nearest(const std::vector<Vec3>& points, const Vec3& query);

/// Linear-scan k nearest, sorted by (squared distance, index).
std::vector<int> brute_knn(const std::vector<Vec3>& points, const Vec3& query, int k);

/// Density via explicitly inverted normal-frame covariances, built as dense
/// matrices and inverted with full-pivot LU.
double brute_density(const std::vector<GaussianPrimitive>& prims, const Vec3& x, double radius);

/// Classical point-to-plane objective in homogeneous-matrix form:
/// sum over pairs of ((R n_i) . (T p_i - q_i))^2, the scan normal carried
/// along with the moving cloud.
double point_to_plane_cost(const std::vector<Vec3>& source_points,
                           const std::vector<Vec3>& source_normals,
                           const std::vector<Vec3>& target_points, const PoseSE3& T);

}  // namespace gslam::reference
