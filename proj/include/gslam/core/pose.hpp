#pragma once

#include "gslam/core/types.hpp"

namespace gslam {

/// Rigid transform in SE(3), stored as unit quaternion + translation.
/// Composition is `this` after `rhs`: (a * b)(x) = a(b(x)).
/// Tangent vectors are ordered [translation, rotation].
class PoseSE3 {
 public:
  PoseSE3() : rotation_(Quat::Identity()), translation_(Vec3::Zero()) {}
  PoseSE3(const Quat& q, const Vec3& t) : rotation_(q.normalized()), translation_(t) {}

  static PoseSE3 identity() { return {}; }

  const Quat& rotation() const { return rotation_; }
  const Vec3& translation() const { return translation_; }
  Mat3 rotation_matrix() const { return rotation_.toRotationMatrix(); }

  Vec3 operator*(const Vec3& x) const { return rotation_ * x + translation_; }

  PoseSE3 operator*(const PoseSE3& rhs) const {
    return {rotation_ * rhs.rotation_, rotation_ * rhs.translation_ + translation_};
  }

  PoseSE3 inverse() const {
    Quat qi = rotation_.conjugate();
    return {qi, qi * (-translation_)};
  }

  /// Exponential map from a twist [rho, phi] to a pose.
  static PoseSE3 exp(const Vec6& twist);

  /// Logarithm map; inverse of exp.
  Vec6 log() const;

  /// Rotation angle in radians.
  double angle() const;

  static Mat3 hat(const Vec3& v);

 private:
  Quat rotation_;
  Vec3 translation_;
};

}  // namespace gslam
