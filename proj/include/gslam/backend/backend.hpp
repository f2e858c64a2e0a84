#pragma once

#include <vector>

#include "gslam/backend/loss.hpp"
#include "gslam/map/gaussian_map.hpp"

namespace gslam {

struct MapLearningRates {
  double mean = 1.6e-4;  // multiplied by the scene extent
  double log_scales = 5e-3;
  double rotation = 1e-3;
  double opacity = 5e-2;  // applied to the logit
  double color = 2.5e-3;
};

struct BackendParams {
  double lambda1 = 0.5;
  double lambda2 = 0.01;
  int pose_iterations = 10;
  int map_iterations = 25;
  double pose_step = 1e-2;  // initial backtracking step
  MapLearningRates rates;
  int batch_keyframes = 5;  // window per optimization batch
  double opacity_floor = 0.05;
  int stale_window = 10;
  InsertOptions insert;
};

/// One "batch, round, iter" line of the per-round loss log.
struct LossLogRow {
  int batch = 0;
  int round = 0;
  int iter = 0;
  double e_pho = 0, e_geo = 0, e_normal = 0, total = 0;
};

/// Round 1: first-order descent with backtracking on the keyframe poses in
/// the window, map frozen. The globally first keyframe is the gauge and is
/// never touched. The window loss is non-increasing over the round.
void optimize_poses(const GaussianMap& map, std::vector<KeyframeRecord*>& window,
                    const CameraModel& cam, const BackendParams& params, int batch,
                    std::vector<LossLogRow>* log = nullptr);

/// Round 2: Adam steps on every primitive visible from the window, poses
/// frozen; afterwards surviving unreliable primitives become reliable and
/// low-opacity ones are pruned.
void optimize_map(GaussianMap& map, const std::vector<KeyframeRecord*>& window,
                  const CameraModel& cam, const BackendParams& params, int batch,
                  std::vector<LossLogRow>* log = nullptr);

/// The back end: owns the keyframe list and runs insert / split / two rounds
/// / prune per batch.
class Backend {
 public:
  Backend(const CameraModel& cam, const BackendParams& params)
      : cam_(cam), params_(params) {}

  /// Ingest queued keyframes (tracked pose attached) and run one batch.
  void step(GaussianMap& map, std::vector<KeyframeRecord> new_keyframes);

  const std::vector<KeyframeRecord>& keyframes() const { return keyframes_; }
  std::vector<KeyframeRecord>& keyframes() { return keyframes_; }
  const std::vector<LossLogRow>& loss_log() const { return log_; }

 private:
  CameraModel cam_;
  BackendParams params_;
  std::vector<KeyframeRecord> keyframes_;
  std::vector<LossLogRow> log_;
  int batches_ = 0;
};

}  // namespace gslam
