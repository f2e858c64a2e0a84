#include "gslam/metrics/image_quality.hpp"

#include <cmath>
#include <vector>

#include "gslam/core/errors.hpp"
#include "gslam/core/parallel.hpp"

namespace gslam::metrics {

namespace {

constexpr int kWindow = 11;
constexpr int kRadius = kWindow / 2;
constexpr double kC1 = 0.01 * 0.01;
constexpr double kC2 = 0.03 * 0.03;

std::vector<double> gaussian_kernel() {
  std::vector<double> k(kWindow);
  double sum = 0.0;
  for (int i = 0; i < kWindow; ++i) {
    const double d = i - kRadius;
    k[i] = std::exp(-d * d / (2.0 * 1.5 * 1.5));
    sum += k[i];
  }
  for (double& v : k) v /= sum;
  return k;
}

}  // namespace

double psnr(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height)
    throw DimensionMismatch("psnr inputs differ in size");
  double mse = 0.0;
  for (size_t i = 0; i < a.px.size(); ++i) mse += (a.px[i] - b.px[i]).squaredNorm();
  mse /= 3.0 * static_cast<double>(a.px.size());
  if (mse < 1e-12) return 99.0;
  return 10.0 * std::log10(1.0 / mse);
}

double ssim(const Image& a, const Image& b) {
  if (a.width != b.width || a.height != b.height)
    throw DimensionMismatch("ssim inputs differ in size");
  const int w = a.width, h = a.height;
  static const std::vector<double> kernel = gaussian_kernel();

  double total = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    std::vector<double> x(static_cast<size_t>(w) * h), y(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
      x[i] = a.px[i][ch];
      y[i] = b.px[i][ch];
    }

    // Separable blur of x, y, x^2, y^2, xy.
    auto blur_plane = [&](const std::vector<double>& src) {
      std::vector<double> tmp(src.size()), out(src.size());
      parallel_for(h, [&](std::ptrdiff_t row) {
        for (int col = 0; col < w; ++col) {
          double acc = 0.0;
          for (int k = -kRadius; k <= kRadius; ++k) {
            const int cc = std::clamp(col + k, 0, w - 1);
            acc += kernel[k + kRadius] * src[row * w + cc];
          }
          tmp[row * w + col] = acc;
        }
      });
      parallel_for(h, [&](std::ptrdiff_t row) {
        for (int col = 0; col < w; ++col) {
          double acc = 0.0;
          for (int k = -kRadius; k <= kRadius; ++k) {
            const int rr = std::clamp(static_cast<int>(row) + k, 0, h - 1);
            acc += kernel[k + kRadius] * tmp[rr * w + col];
          }
          out[row * w + col] = acc;
        }
      });
      return out;
    };

    std::vector<double> x2(x.size()), y2(x.size()), xy(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
      x2[i] = x[i] * x[i];
      y2[i] = y[i] * y[i];
      xy[i] = x[i] * y[i];
    }
    const auto mu_x = blur_plane(x), mu_y = blur_plane(y);
    const auto m_x2 = blur_plane(x2), m_y2 = blur_plane(y2), m_xy = blur_plane(xy);

    // Valid region only: windows fully inside the image.
    const int x0 = std::min(kRadius, std::max(0, w - 1) / 2);
    const int y0 = std::min(kRadius, std::max(0, h - 1) / 2);
    const int x1 = std::max(x0, w - 1 - kRadius), y1 = std::max(y0, h - 1 - kRadius);
    double acc = 0.0;
    long count = 0;
    for (int row = y0; row <= y1; ++row) {
      for (int col = x0; col <= x1; ++col) {
        const size_t i = static_cast<size_t>(row) * w + col;
        const double vx = m_x2[i] - mu_x[i] * mu_x[i];
        const double vy = m_y2[i] - mu_y[i] * mu_y[i];
        const double cxy = m_xy[i] - mu_x[i] * mu_y[i];
        const double num = (2.0 * mu_x[i] * mu_y[i] + kC1) * (2.0 * cxy + kC2);
        const double den = (mu_x[i] * mu_x[i] + mu_y[i] * mu_y[i] + kC1) * (vx + vy + kC2);
        acc += num / den;
        ++count;
      }
    }
    total += count > 0 ? acc / static_cast<double>(count) : 1.0;
  }
  return total / 3.0;
}

ImageMetrics image_metrics(const Image& rendered, const Image& target, const LpipsFn& lpips) {
  ImageMetrics m;
  m.psnr = psnr(rendered, target);
  m.ssim = ssim(rendered, target);
  const double lp = lpips ? lpips(rendered, target) : 0.0;
  m.composite = m.ssim + m.psnr / 30.0 + (1.0 - lp);
  return m;
}

}  // namespace gslam::metrics
