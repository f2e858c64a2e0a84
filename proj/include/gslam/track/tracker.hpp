#pragma once

#include <vector>

#include "gslam/core/camera.hpp"
#include "gslam/map/gaussian_map.hpp"

namespace gslam {

/// One point-to-primitive match from the association step.
struct Correspondence {
  int point = -1;      // into the frame cloud
  int primitive = -1;  // position within the submap
  double residual = 0;
  double weight = 0;
};

/// A correspondence resolved into the quantities the objective needs.
/// `point`/`normal` live in the sensor frame, targets in the world frame.
struct TrackingPair {
  Vec3 point;
  Vec3 normal;
  Vec3 target;
  Vec3 target_normal;
  double weight = 1.0;
};

struct TrackingParams {
  double lambda_r = 0.1;        // normal-direction regularizer weight
  double max_dist = 1.0;        // association gate, halved after iteration 10
  int max_iterations = 30;
  double update_tol = 1e-5;
  int min_inliers = 50;
  double huber_factor = 3.0;    // times the median absolute residual
};

struct TrackingResult {
  PoseSE3 pose;
  int iterations = 0;
  double final_cost = 0;
  int inlier_count = 0;
  bool converged = false;
};

/// Nearest submap primitive for every valid-normal world-frame point, pairs
/// beyond `max_dist` dropped, equal distances resolved to the lowest
/// primitive index. Throws NoCorrespondences when nothing survives the gate.
std::vector<Correspondence> associate(const std::vector<Vec3>& points_world,
                                      const std::vector<Vec3>& normals_world,
                                      const std::vector<uint8_t>& valid,
                                      const GaussianMap& map, double max_dist);

/// Weighted point-to-plane objective with the normal-direction regularizer;
/// scan normals ride along with the moving pose.
double tracking_cost(const std::vector<TrackingPair>& pairs, const PoseSE3& pose,
                     double lambda_r);

/// Analytic gradient of tracking_cost with respect to a left perturbation
/// [translation, rotation] of `pose`.
Vec6 tracking_cost_gradient(const std::vector<TrackingPair>& pairs, const PoseSE3& pose,
                            double lambda_r);

/// Gauss-Newton registration of one frame against the tracking submap.
/// `cloud` and its normals are given in the sensor frame; the returned pose
/// maps sensor to world. Throws TrackingLost on thin inliers or a
/// rank-deficient system.
TrackingResult track_frame(const PointCloud& cloud, const GaussianMap& map,
                           const PoseSE3& initial_pose, const TrackingParams& params = {});

/// Frustum-overlap co-visibility of the submap between two sensor poses,
/// |V(a) and V(b)| / |V(a) or V(b)|; 1.0 when both sets are empty.
double covisibility(const GaussianMap& map, const PoseSE3& pose_a, const PoseSE3& pose_b,
                    const CameraModel& cam);

/// A frame becomes a keyframe when co-visibility drops below the threshold.
inline bool keyframe_decision(double covis, double threshold = 0.85) {
  return covis < threshold;
}

}  // namespace gslam
