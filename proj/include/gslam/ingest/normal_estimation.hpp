#pragma once

#include "gslam/ingest/cloud.hpp"

namespace gslam {

/// Per-point normals from k-NN PCA, sign-flipped to face `viewpoint`.
/// Degenerate (near-collinear) neighborhoods are flagged invalid instead of
/// producing a normal. Parallel over points.
void estimate_normals(PointCloud& cloud, int k, const Vec3& viewpoint);

}  // namespace gslam
