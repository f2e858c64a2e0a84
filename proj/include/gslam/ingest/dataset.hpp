#pragma once

#include <string>
#include <vector>

#include "gslam/core/camera.hpp"
#include "gslam/ingest/frame.hpp"

namespace gslam {

struct SequenceOptions {
  double pair_tolerance = 0.05;  // seconds between an image and its scan
};

/// A dataset directory loaded into memory:
///   calib.txt, images/<t>.ppm (P6), scans/<t>.xyz, timestamps in filenames.
struct Sequence {
  CameraModel cam;
  std::vector<Frame> frames;
  int skipped = 0;  // unpaired images/scans
};

/// Loads and pairs a sequence in timestamp order. Each frame carries the
/// image, the scan, and the projected LiDAR depth image. Throws
/// MissingCalibration / UnreadableFile.
Sequence load_sequence(const std::string& dir, const SequenceOptions& opts = {});

}  // namespace gslam
