#include "gslam/ingest/frame.hpp"

#include <algorithm>
#include <cmath>

namespace gslam {

Vec3 Image::sample(double u, double v) const {
  const double x = std::clamp(u, 0.0, static_cast<double>(width - 1));
  const double y = std::clamp(v, 0.0, static_cast<double>(height - 1));
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, width - 1);
  const int y1 = std::min(y0 + 1, height - 1);
  const double ax = x - x0;
  const double ay = y - y0;
  return (1 - ax) * (1 - ay) * at(x0, y0) + ax * (1 - ay) * at(x1, y0) +
         (1 - ax) * ay * at(x0, y1) + ax * ay * at(x1, y1);
}

}  // namespace gslam
