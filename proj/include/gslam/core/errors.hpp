#pragma once

#include <stdexcept>
#include <string>

namespace gslam {

struct MissingCalibration : std::runtime_error {
  explicit MissingCalibration(const std::string& path)
      : std::runtime_error("missing calibration file: " + path) {}
};

struct UnreadableFile : std::runtime_error {
  explicit UnreadableFile(const std::string& path)
      : std::runtime_error("unreadable file: " + path) {}
};

struct NoCorrespondences : std::runtime_error {
  NoCorrespondences() : std::runtime_error("no correspondences within max distance") {}
};

struct TrackingLost : std::runtime_error {
  explicit TrackingLost(const std::string& why) : std::runtime_error("tracking lost: " + why) {}
};

struct NoReliableAnchor : std::runtime_error {
  NoReliableAnchor() : std::runtime_error("no reliable primitive to anchor a split") {}
};

struct InsufficientOverlap : std::runtime_error {
  InsufficientOverlap() : std::runtime_error("fewer than 2 timestamp matches between trajectories") {}
};

struct DimensionMismatch : std::runtime_error {
  explicit DimensionMismatch(const std::string& what) : std::runtime_error("dimension mismatch: " + what) {}
};

}  // namespace gslam
