#pragma once

#include <functional>

#include "gslam/ingest/frame.hpp"

namespace gslam::metrics {

struct ImageMetrics {
  double ssim = 0;
  double psnr = 0;       // dB, capped at 99 for identical images
  double composite = 0;  // ssim + psnr/30 + (1 - lpips)
};

/// Optional perceptual-distance plug-in; the composite uses 0 when absent.
using LpipsFn = std::function<double(const Image&, const Image&)>;

double psnr(const Image& a, const Image& b);

/// Mean SSIM over channels, 11x11 Gaussian window with sigma 1.5,
/// C1 = 0.01^2, C2 = 0.03^2, evaluated on the valid (fully-covered) region.
double ssim(const Image& a, const Image& b);

ImageMetrics image_metrics(const Image& rendered, const Image& target,
                           const LpipsFn& lpips = nullptr);

}  // namespace gslam::metrics
