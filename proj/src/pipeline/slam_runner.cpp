#include "gslam/pipeline/slam_runner.hpp"

#include <chrono>
#include <condition_variable>
#include <memory>
#include <mutex>
#include <thread>

#include "gslam/core/errors.hpp"
#include "gslam/core/parallel.hpp"
#include "gslam/ingest/normal_estimation.hpp"
#include "gslam/track/tracker.hpp"

namespace gslam {

namespace {

BackendParams backend_params(const io::RunConfig& cfg) {
  BackendParams p;
  p.lambda1 = cfg.lambda1;
  p.lambda2 = cfg.lambda2;
  p.pose_iterations = cfg.pose_iters;
  p.map_iterations = cfg.map_iters;
  p.pose_step = cfg.pose_step;
  p.rates = {cfg.lr_mean, cfg.lr_log_scales, cfg.lr_rotation, cfg.lr_opacity, cfg.lr_color};
  p.batch_keyframes = cfg.batch_keyframes;
  p.opacity_floor = cfg.opacity_floor;
  p.stale_window = cfg.stale_window;
  p.insert = {cfg.ray_stretch, cfg.init_opacity, cfg.window_events, cfg.radius_factor};
  return p;
}

TrackingParams tracking_params(const io::RunConfig& cfg) {
  TrackingParams p;
  p.lambda_r = cfg.lambda_r;
  p.max_dist = cfg.max_dist;
  p.max_iterations = cfg.track_max_iters;
  p.update_tol = cfg.track_tol;
  p.min_inliers = cfg.min_inliers;
  p.huber_factor = cfg.huber_factor;
  return p;
}

// Scan re-expressed in the camera frame, which is the frame tracking works in.
PointCloud to_camera_frame(const PointCloud& cloud, const PoseSE3& T_cam_lidar) {
  PointCloud out = cloud;
  const Mat3 R = T_cam_lidar.rotation_matrix();
  for (size_t i = 0; i < cloud.points.size(); ++i) {
    out.points[i] = T_cam_lidar * cloud.points[i];
    if (cloud.has_normals()) out.normals[i] = R * cloud.normals[i];
  }
  return out;
}

}  // namespace

SlamOutputs run_slam(const Sequence& seq, const io::RunConfig& cfg) {
  SlamOutputs out;
  set_thread_count(cfg.threads);
  const auto t_start = std::chrono::steady_clock::now();

  Backend backend(seq.cam, backend_params(cfg));
  const TrackingParams track_params = tracking_params(cfg);

  GaussianMap map;
  map.set_options(backend_params(cfg).insert);
  if (cfg.skybox_count > 0)
    map.init_skybox(cfg.skybox_count, cfg.skybox_radius, static_cast<uint64_t>(cfg.seed) + 1);

  const bool async = cfg.threads > 1;

  // Shared state for the asynchronous mode.
  std::mutex mu;
  std::condition_variable cv;
  std::vector<KeyframeRecord> queue;
  bool done = false;
  std::shared_ptr<const GaussianMap> snapshot;
  std::thread backend_thread;

  auto publish = [&](const GaussianMap& m) {
    auto copy = std::make_shared<GaussianMap>(m);
    copy->submap_indices();  // warm the submap cache in the copy
    std::lock_guard<std::mutex> lock(mu);
    snapshot = std::move(copy);
  };

  if (async) {
    backend_thread = std::thread([&] {
      for (;;) {
        std::vector<KeyframeRecord> batch;
        {
          std::unique_lock<std::mutex> lock(mu);
          cv.wait(lock, [&] { return done || !queue.empty(); });
          if (queue.empty() && done) return;
          batch.swap(queue);
        }
        backend.step(map, std::move(batch));
        publish(map);
        cv.notify_all();
      }
    });
  }

  PoseSE3 prev_pose;
  PoseSE3 last_kf_pose;
  bool have_keyframe = false;

  auto submit_keyframe = [&](const Frame& frame, const PoseSE3& pose) {
    KeyframeRecord kf;
    kf.frame = frame;
    kf.pose = pose;
    ++out.keyframes;
    if (async) {
      {
        std::lock_guard<std::mutex> lock(mu);
        queue.push_back(std::move(kf));
      }
      cv.notify_all();
    } else {
      backend.step(map, {std::move(kf)});
    }
  };

  try {
    for (const Frame& frame : seq.frames) {
      Frame working = frame;
      estimate_normals(working.cloud, cfg.normal_k, Vec3::Zero());
      const PointCloud cam_cloud = to_camera_frame(working.cloud, seq.cam.T_cam_lidar);

      PoseSE3 pose = prev_pose;  // constant-position motion model
      if (have_keyframe) {
        if (async) {
          // wait until the first keyframe has been integrated
          std::shared_ptr<const GaussianMap> snap;
          {
            std::unique_lock<std::mutex> lock(mu);
            cv.wait(lock, [&] { return snapshot != nullptr; });
            snap = snapshot;
          }
          pose = track_frame(cam_cloud, *snap, prev_pose, track_params).pose;
        } else {
          pose = track_frame(cam_cloud, map, prev_pose, track_params).pose;
        }
      }
      out.trajectory.push_back({frame.timestamp, pose});
      ++out.frames;

      bool make_kf = !have_keyframe;
      if (have_keyframe) {
        const GaussianMap* covis_map = &map;
        std::shared_ptr<const GaussianMap> snap;
        if (async) {
          std::lock_guard<std::mutex> lock(mu);
          snap = snapshot;
          covis_map = snap.get();
        }
        // before the first batch lands there is nothing to overlap against
        const double covis =
            covis_map ? covisibility(*covis_map, last_kf_pose, pose, seq.cam) : 1.0;
        make_kf = keyframe_decision(covis, cfg.keyframe_covis);
      }
      if (make_kf) {
        submit_keyframe(working, pose);
        last_kf_pose = pose;
        have_keyframe = true;
      }
      prev_pose = pose;
    }
  } catch (const TrackingLost&) {
    out.tracking_lost = true;
  }

  if (async) {
    {
      std::lock_guard<std::mutex> lock(mu);
      done = true;
    }
    cv.notify_all();
    backend_thread.join();
  }

  out.map = std::move(map);
  out.loss_log = backend.loss_log();
  const auto t_end = std::chrono::steady_clock::now();
  out.seconds = std::chrono::duration<double>(t_end - t_start).count();
  out.fps = out.seconds > 0 ? out.frames / out.seconds : 0.0;
  return out;
}

}  // namespace gslam
