#pragma once

#include <string>
#include <vector>

#include "gslam/backend/backend.hpp"
#include "gslam/ingest/dataset.hpp"
#include "gslam/io/run_config.hpp"
#include "gslam/io/text_formats.hpp"
#include "gslam/map/gaussian_map.hpp"

namespace gslam {

struct SlamOutputs {
  std::vector<io::TimedPose> trajectory;  // tracked camera pose per frame
  GaussianMap map;
  std::vector<LossLogRow> loss_log;
  int keyframes = 0;
  int frames = 0;
  double seconds = 0;
  double fps = 0;  // frames / seconds
  bool tracking_lost = false;
};

/// Full pipeline over a loaded sequence. threads == 1 runs tracking and the
/// back end strictly interleaved; more threads run the back end on its own
/// thread fed by an ordered keyframe queue while tracking works on published
/// map snapshots.
SlamOutputs run_slam(const Sequence& seq, const io::RunConfig& cfg);

}  // namespace gslam
