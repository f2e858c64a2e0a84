#pragma once

#include <vector>

#include "gslam/map/gaussian_map.hpp"

namespace gslam {

/// Re-anchor unreliable primitives onto the distribution of their nearest
/// reliable neighbor: the mean is redrawn from N(mean_y, Sigma_y) with an RNG
/// seeded by (frame index, primitive index), the covariance is copied from the
/// anchor, color and opacity are kept. The primitive stays unreliable until it
/// survives a back-end round. Throws NoReliableAnchor when nothing can anchor.
int conditional_split(GaussianMap& map, const std::vector<int>& unreliable, int frame_index);

/// Draw one mean from N(anchor.mean, covariance_of(anchor)).
Vec3 sample_from_primitive(const GaussianPrimitive& anchor, uint64_t frame_key,
                           uint64_t prim_key);

}  // namespace gslam
