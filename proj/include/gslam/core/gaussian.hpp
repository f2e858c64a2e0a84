#pragma once

#include "gslam/core/types.hpp"

namespace gslam {

/// Anisotropic 3D Gaussian map primitive. Covariance is parameterized as
/// unit quaternion + log axis standard deviations so it stays SPD under
/// unconstrained optimization steps.
struct GaussianPrimitive {
  Vec3 mean = Vec3::Zero();
  Quat rotation = Quat::Identity();
  Vec3 log_scales = Vec3::Zero();
  double opacity = 0.5;        // in (0, 1)
  Vec3 color = Vec3::Constant(0.5);  // rgb in [0, 1]
  bool reliable = false;
  int birth_frame = 0;
  double normal_sign = 1.0;  // orientation of the shortest axis, fixed at creation

  Vec3 scales() const { return log_scales.array().exp(); }

  /// Index of the shortest axis; ties resolve to the lowest index.
  int shortest_axis() const {
    int k = 0;
    for (int i = 1; i < 3; ++i)
      if (log_scales[i] < log_scales[k]) k = i;
    return k;
  }

  /// Unit eigen-axis of the smallest standard deviation, with the stored sign.
  Vec3 normal() const {
    return normal_sign * rotation.normalized().toRotationMatrix().col(shortest_axis());
  }

  double smallest_scale() const { return std::exp(log_scales[shortest_axis()]); }

  /// Flip the stored sign so normal() points toward `sensor_origin`.
  void orient_normal_toward(const Vec3& sensor_origin) {
    if (normal().dot(sensor_origin - mean) < 0.0) normal_sign = -normal_sign;
  }

  /// Clamp axis standard deviations to the global floor.
  void clamp_scales() {
    const double floor_log = std::log(kScaleFloor);
    for (int i = 0; i < 3; ++i)
      if (log_scales[i] < floor_log) log_scales[i] = floor_log;
  }
};

/// G(x) = exp(-1/2 (x-mu)^T Sigma^-1 (x-mu)), in (0, 1].
double gaussian_eval(const GaussianPrimitive& g, const Vec3& x);

/// Sigma = R diag(exp(2 log_scales)) R^T.
Mat3 covariance_of(const GaussianPrimitive& g);

}  // namespace gslam
