#pragma once

#include "gslam/render/renderer.hpp"

namespace gslam::reference {

/// Serial per-pixel renderer: every splat is evaluated at every pixel from an
/// explicitly inverted 2D covariance, with the same footprint and termination
/// semantics as the tile renderer but none of its binning machinery. Kept as
/// the comparison oracle and benchmark baseline.
RenderBuffer naive_render(const std::vector<GaussianPrimitive>& prims,
                          const PoseSE3& cam_pose, const CameraModel& cam);

/// Same compositing evaluated back to front with the over operator.
RenderBuffer naive_render_back_to_front(const std::vector<GaussianPrimitive>& prims,
                                        const PoseSE3& cam_pose, const CameraModel& cam);

}  // namespace gslam::reference
