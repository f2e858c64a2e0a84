#pragma once

#include "gslam/core/camera.hpp"
#include "gslam/ingest/frame.hpp"
#include "gslam/map/gaussian_map.hpp"
#include "gslam/render/renderer.hpp"

namespace gslam {

/// Rendered-vs-observed loss split. `total` is always derived from the
/// components through recompute_total, never accumulated separately.
struct LossBreakdown {
  double e_pho = 0;
  double e_geo = 0;
  double e_normal = 0;
  double lambda1 = 0.5;
  double lambda2 = 0.01;
  double total = 0;

  double recompute_total() const {
    return (1.0 - lambda1) * e_pho + lambda1 * e_geo + lambda2 * e_normal;
  }
};

/// A keyframe owned by the back end; `pose` is camera-to-world and mutable by
/// the pose round.
struct KeyframeRecord {
  Frame frame;
  PoseSE3 pose;
  int insertion_event = 0;
};

/// Mean-L1 photometric error over all pixels, mean-L1 depth error over pixels
/// with a LiDAR return, and the mean smallest axis scale over visible
/// primitives. Rendered buffers are returned through `buffers` when given.
LossBreakdown compute_loss(const GaussianMap& map, const KeyframeRecord& kf,
                           const CameraModel& cam, double lambda1, double lambda2,
                           RenderBuffer* buffers = nullptr);

/// Upstream dL/dColor and dL/dDepth for the rendered terms of compute_loss.
void loss_upstream(const RenderBuffer& buffers, const KeyframeRecord& kf, double lambda1,
                   Image& d_color, Grid& d_depth);

/// Indices of primitives whose means project inside the frustum at `pose`.
std::vector<int> visible_primitives(const GaussianMap& map, const PoseSE3& pose,
                                    const CameraModel& cam);

}  // namespace gslam
