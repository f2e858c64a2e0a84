#pragma once

#include "gslam/ingest/frame.hpp"

namespace gslam::reference {

/// Direct 2D-window SSIM (no separable convolution), same window, constants
/// and valid-region convention as the production implementation.
double ssim_naive(const Image& a, const Image& b);

}  // namespace gslam::reference
