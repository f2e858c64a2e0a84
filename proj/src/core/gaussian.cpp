#include "gslam/core/gaussian.hpp"

namespace gslam {

double gaussian_eval(const GaussianPrimitive& g, const Vec3& x) {
  const Mat3 R = g.rotation.normalized().toRotationMatrix();
  const Vec3 local = R.transpose() * (x - g.mean);
  const Vec3 inv_var = (-2.0 * g.log_scales).array().exp();
  const double mahal2 = local.cwiseProduct(local).dot(inv_var);
  return std::exp(-0.5 * mahal2);
}

Mat3 covariance_of(const GaussianPrimitive& g) {
  const Mat3 R = g.rotation.normalized().toRotationMatrix();
  const Vec3 var = (2.0 * g.log_scales).array().exp();
  Mat3 sigma = R * var.asDiagonal() * R.transpose();
  return 0.5 * (sigma + sigma.transpose());
}

}  // namespace gslam
