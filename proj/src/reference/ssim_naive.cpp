#include "gslam/reference/ssim_naive.hpp"

#include <cmath>
#include <vector>

namespace gslam::reference {

double ssim_naive(const Image& a, const Image& b) {
  constexpr int radius = 5;
  constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;

  double kernel[11][11];
  double ksum = 0.0;
  for (int i = 0; i < 11; ++i)
    for (int j = 0; j < 11; ++j) {
      const double dx = i - radius, dy = j - radius;
      kernel[i][j] = std::exp(-(dx * dx + dy * dy) / (2.0 * 1.5 * 1.5));
      ksum += kernel[i][j];
    }
  for (auto& row : kernel)
    for (double& v : row) v /= ksum;

  const int w = a.width, h = a.height;
  double total = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    double acc = 0.0;
    long count = 0;
    for (int y = radius; y <= h - 1 - radius; ++y) {
      for (int x = radius; x <= w - 1 - radius; ++x) {
        double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
        for (int dy = -radius; dy <= radius; ++dy) {
          for (int dx = -radius; dx <= radius; ++dx) {
            const double k = kernel[dy + radius][dx + radius];
            const double va = a.at(x + dx, y + dy)[ch];
            const double vb = b.at(x + dx, y + dy)[ch];
            mx += k * va;
            my += k * vb;
            mxx += k * va * va;
            myy += k * vb * vb;
            mxy += k * va * vb;
          }
        }
        const double vx = mxx - mx * mx;
        const double vy = myy - my * my;
        const double cxy = mxy - mx * my;
        acc += ((2 * mx * my + c1) * (2 * cxy + c2)) /
               ((mx * mx + my * my + c1) * (vx + vy + c2));
        ++count;
      }
    }
    total += count > 0 ? acc / count : 1.0;
  }
  return total / 3.0;
}

}  // namespace gslam::reference
