#include "gslam/ingest/normal_estimation.hpp"

#include <Eigen/Eigenvalues>

#include "gslam/core/parallel.hpp"
#include "gslam/map/kdtree.hpp"

namespace gslam {

void estimate_normals(PointCloud& cloud, int k, const Vec3& viewpoint) {
  const size_t n = cloud.size();
  cloud.normals.assign(n, Vec3::Zero());
  cloud.normal_valid.assign(n, 0);
  if (n == 0) return;

  KdTree3 tree(cloud.points);

  parallel_for(static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t i) {
    std::vector<int> idx;
    std::vector<double> d2;
    tree.knn(cloud.points[i], k + 1, idx, d2);  // includes the point itself
    if (static_cast<int>(idx.size()) < 3) return;

    Vec3 mean = Vec3::Zero();
    for (int j : idx) mean += cloud.points[j];
    mean /= static_cast<double>(idx.size());

    Mat3 scatter = Mat3::Zero();
    for (int j : idx) {
      const Vec3 d = cloud.points[j] - mean;
      scatter += d * d.transpose();
    }

    Eigen::SelfAdjointEigenSolver<Mat3> eig(scatter);
    const Vec3 evals = eig.eigenvalues();  // ascending
    // Rank < 2 (collinear neighborhood): the two smallest eigenvalues vanish.
    if (evals[1] <= 1e-12 * std::max(evals[2], 1e-300)) return;

    Vec3 normal = eig.eigenvectors().col(0);
    if (normal.dot(viewpoint - cloud.points[i]) < 0.0) normal = -normal;
    cloud.normals[i] = normal.normalized();
    cloud.normal_valid[i] = 1;
  });
}

}  // namespace gslam
