#pragma once

#include <vector>

#include "gslam/io/text_formats.hpp"

namespace gslam::metrics {

struct TrajectoryMetrics {
  double ate_rmse = 0;  // after rigid alignment, scene units
  double t_rel = 0;     // percent of sub-trajectory length
  double r_rel = 0;     // degrees per 100 units
};

/// Timestamp-matched comparison: rigid (no-scale) alignment for the absolute
/// error, relative drift averaged over the standard sub-trajectory lengths
/// {10, 20, 50, 100}. Throws InsufficientOverlap on fewer than two matches.
TrajectoryMetrics evaluate_trajectory(const std::vector<io::TimedPose>& estimate,
                                      const std::vector<io::TimedPose>& ground_truth,
                                      double match_tolerance = 0.05);

}  // namespace gslam::metrics
