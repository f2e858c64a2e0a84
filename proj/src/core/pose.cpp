#include "gslam/core/pose.hpp"

#include <cmath>

namespace gslam {

Mat3 PoseSE3::hat(const Vec3& v) {
  Mat3 m;
  m << 0, -v.z(), v.y(), v.z(), 0, -v.x(), -v.y(), v.x(), 0;
  return m;
}

PoseSE3 PoseSE3::exp(const Vec6& twist) {
  const Vec3 rho = twist.head<3>();
  const Vec3 phi = twist.tail<3>();
  const double theta = phi.norm();
  const Mat3 K = hat(phi);

  Mat3 R, V;
  if (theta < 1e-10) {
    R = Mat3::Identity() + K + 0.5 * K * K;
    V = Mat3::Identity() + 0.5 * K + K * K / 6.0;
  } else {
    const double t2 = theta * theta;
    R = Mat3::Identity() + std::sin(theta) / theta * K +
        (1.0 - std::cos(theta)) / t2 * K * K;
    V = Mat3::Identity() + (1.0 - std::cos(theta)) / t2 * K +
        (theta - std::sin(theta)) / (t2 * theta) * K * K;
  }
  return {Quat(R), V * rho};
}

Vec6 PoseSE3::log() const {
  const Mat3 R = rotation_matrix();
  const double cos_theta = std::clamp((R.trace() - 1.0) * 0.5, -1.0, 1.0);
  const double theta = std::acos(cos_theta);

  Vec3 phi;
  if (theta < 1e-10) {
    phi = 0.5 * Vec3(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  } else if (theta > M_PI - 1e-6) {
    // Near pi the antisymmetric part degenerates; recover the axis from R + I.
    Mat3 B = 0.5 * (R + Mat3::Identity());
    int k;
    B.diagonal().maxCoeff(&k);
    Vec3 axis = B.col(k) / std::sqrt(B(k, k));
    Vec3 w = 0.5 * Vec3(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
    if (axis.dot(w) < 0) axis = -axis;
    phi = theta * axis.normalized();
  } else {
    phi = theta / (2.0 * std::sin(theta)) *
          Vec3(R(2, 1) - R(1, 2), R(0, 2) - R(2, 0), R(1, 0) - R(0, 1));
  }

  const Mat3 K = hat(phi);
  Mat3 Vinv;
  if (theta < 1e-10) {
    Vinv = Mat3::Identity() - 0.5 * K + K * K / 12.0;
  } else {
    const double half = 0.5 * theta;
    const double cot_half = std::cos(half) / std::sin(half);
    Vinv = Mat3::Identity() - 0.5 * K +
           (1.0 - half * cot_half) / (theta * theta) * K * K;
  }

  Vec6 twist;
  twist.head<3>() = Vinv * translation_;
  twist.tail<3>() = phi;
  return twist;
}

double PoseSE3::angle() const {
  const double w = std::clamp(std::abs(rotation_.w()), 0.0, 1.0);
  return 2.0 * std::acos(w);
}

}  // namespace gslam
