#pragma once

#include <string>

#include "gslam/map/gaussian_map.hpp"

namespace gslam::io {

/// Gaussian map as a splat PLY (binary little-endian): x y z, opacity,
/// scale_0..2 (log), rot_0..3 (w x y z), f_dc_0..2 (color), plus a
/// `reliable` uchar.
void write_splat_ply(const std::string& path, const GaussianMap& map);
GaussianMap read_splat_ply(const std::string& path);

}  // namespace gslam::io
