#pragma once

#include <vector>

#include "gslam/core/camera.hpp"
#include "gslam/core/gaussian.hpp"
#include "gslam/ingest/frame.hpp"

namespace gslam {

/// Outputs of one rasterization pass.
struct RenderBuffer {
  Image color;
  Grid depth;        // camera-frame z composited like color
  Grid alpha_accum;  // total compositing weight per pixel, in [0, 1]
};

/// Per-primitive parameter gradients plus the camera pose gradient from one
/// backward pass. The pose gradient is taken with respect to a left
/// perturbation of the world-to-camera transform, ordered [translation,
/// rotation]. Quaternion gradients are with respect to the raw (x, y, z, w)
/// coefficients, with renormalization accounted for.
struct RenderGradients {
  std::vector<Vec3> d_mean;
  std::vector<Vec3> d_log_scales;
  std::vector<Vec4> d_rotation;  // (x, y, z, w)
  std::vector<double> d_opacity;
  std::vector<Vec3> d_color;
  Vec6 d_pose = Vec6::Zero();

  void resize(size_t n) {
    d_mean.assign(n, Vec3::Zero());
    d_log_scales.assign(n, Vec3::Zero());
    d_rotation.assign(n, Vec4::Zero());
    d_opacity.assign(n, 0.0);
    d_color.assign(n, Vec3::Zero());
    d_pose.setZero();
  }
};

/// Tile-based alpha compositing of 3D Gaussians projected through the local
/// affine approximation of the perspective map. Primitives are composited
/// front to back in (camera depth, index) order; compositing stops once
/// transmittance drops below 1e-4, and a splat covers a pixel only within its
/// 3-sigma ellipse.
RenderBuffer render(const std::vector<GaussianPrimitive>& prims, const PoseSE3& cam_pose,
                    const CameraModel& cam);

/// Reverse-mode pass of the same compositing chain. `upstream_color` and
/// `upstream_depth` hold dL/dColor and dL/dDepth; the forward buffers are
/// recomputed internally (and returned through `forward` when given).
RenderGradients render_with_gradients(const std::vector<GaussianPrimitive>& prims,
                                      const PoseSE3& cam_pose, const CameraModel& cam,
                                      const Image& upstream_color, const Grid& upstream_depth,
                                      RenderBuffer* forward = nullptr);

namespace render_detail {
constexpr double kZNear = 1e-3;
constexpr double kMahalanobisCutoff = 9.0;   // 3-sigma ellipse
constexpr double kFootprintDilation = 0.3;   // pixels, bounding box only
constexpr double kMinTransmittance = 1e-4;
constexpr int kTileSize = 16;

// Footprint falloff: the exact Gaussian inside the core, tapered to zero
// with a raised cosine over the outer skirt so the image is C1 in every
// parameter. A hard cutoff (or a C0 one) leaves derivative jumps at the
// ellipse boundary that break finite-difference validation of the backward
// pass.
constexpr double kTaperStart = 6.0;  // squared Mahalanobis where the taper begins

inline double falloff(double m2) {
  const double g = std::exp(-0.5 * m2);
  if (m2 <= kTaperStart) return g;
  const double span = kMahalanobisCutoff - kTaperStart;
  return g * 0.5 * (1.0 + std::cos(M_PI * (m2 - kTaperStart) / span));
}

inline double falloff_dm2(double m2) {
  const double g = std::exp(-0.5 * m2);
  if (m2 <= kTaperStart) return -0.5 * g;
  const double span = kMahalanobisCutoff - kTaperStart;
  const double phase = M_PI * (m2 - kTaperStart) / span;
  const double w = 0.5 * (1.0 + std::cos(phase));
  const double dw = -0.5 * M_PI / span * std::sin(phase);
  return g * (dw - 0.5 * w);
}
}  // namespace render_detail

}  // namespace gslam
