#include "gslam/metrics/trajectory.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "gslam/core/errors.hpp"

namespace gslam::metrics {

namespace {

constexpr double kSubLengths[] = {10.0, 20.0, 50.0, 100.0};

}  // namespace

TrajectoryMetrics evaluate_trajectory(const std::vector<io::TimedPose>& estimate,
                                      const std::vector<io::TimedPose>& ground_truth,
                                      double match_tolerance) {
  // Associate by nearest timestamp.
  std::vector<std::pair<PoseSE3, PoseSE3>> matched;  // (est, gt)
  for (const io::TimedPose& e : estimate) {
    int best = -1;
    double best_dt = match_tolerance;
    for (size_t j = 0; j < ground_truth.size(); ++j) {
      const double dt = std::abs(ground_truth[j].timestamp - e.timestamp);
      if (dt <= best_dt) {
        best_dt = dt;
        best = static_cast<int>(j);
      }
    }
    if (best >= 0) matched.push_back({e.pose, ground_truth[best].pose});
  }
  if (matched.size() < 2) throw InsufficientOverlap();
  const size_t n = matched.size();

  // Umeyama alignment (rotation + translation) of estimate onto ground truth.
  Eigen::MatrixXd src(3, n), dst(3, n);
  for (size_t i = 0; i < n; ++i) {
    src.col(i) = matched[i].first.translation();
    dst.col(i) = matched[i].second.translation();
  }
  const Eigen::Matrix4d A = Eigen::umeyama(src, dst, false);
  const Mat3 R_a = A.topLeftCorner<3, 3>();
  const Vec3 t_a = A.topRightCorner<3, 1>();

  TrajectoryMetrics out;
  double sq_sum = 0.0;
  for (size_t i = 0; i < n; ++i) {
    const Vec3 aligned = R_a * matched[i].first.translation() + t_a;
    sq_sum += (aligned - matched[i].second.translation()).squaredNorm();
  }
  out.ate_rmse = std::sqrt(sq_sum / static_cast<double>(n));

  // Relative drift over fixed ground-truth path lengths.
  std::vector<double> cumulative(n, 0.0);
  for (size_t i = 1; i < n; ++i)
    cumulative[i] = cumulative[i - 1] + (matched[i].second.translation() -
                                         matched[i - 1].second.translation())
                                            .norm();

  double t_sum = 0.0, r_sum = 0.0;
  long count = 0;
  for (double len : kSubLengths) {
    for (size_t i = 0; i < n; ++i) {
      size_t j = i;
      while (j < n && cumulative[j] - cumulative[i] < len) ++j;
      if (j >= n) break;
      const PoseSE3 d_gt = matched[i].second.inverse() * matched[j].second;
      const PoseSE3 d_est = matched[i].first.inverse() * matched[j].first;
      const PoseSE3 err = d_gt.inverse() * d_est;
      const double seg = cumulative[j] - cumulative[i];
      t_sum += err.translation().norm() / seg * 100.0;
      r_sum += err.angle() * 180.0 / M_PI / seg * 100.0;
      ++count;
    }
  }
  if (count > 0) {
    out.t_rel = t_sum / static_cast<double>(count);
    out.r_rel = r_sum / static_cast<double>(count);
  }
  return out;
}

}  // namespace gslam::metrics
