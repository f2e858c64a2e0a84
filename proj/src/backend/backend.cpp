#include "gslam/backend/backend.hpp"

#include <algorithm>
#include <cmath>

#include "gslam/core/errors.hpp"
#include "gslam/map/conditional_split.hpp"

namespace gslam {

namespace {

LossBreakdown mean_window_loss(const GaussianMap& map,
                               const std::vector<KeyframeRecord*>& window,
                               const CameraModel& cam, const BackendParams& p) {
  LossBreakdown mean;
  mean.lambda1 = p.lambda1;
  mean.lambda2 = p.lambda2;
  for (const KeyframeRecord* kf : window) {
    const LossBreakdown l = compute_loss(map, *kf, cam, p.lambda1, p.lambda2);
    mean.e_pho += l.e_pho;
    mean.e_geo += l.e_geo;
    mean.e_normal += l.e_normal;
  }
  const double k = static_cast<double>(window.size());
  mean.e_pho /= k;
  mean.e_geo /= k;
  mean.e_normal /= k;
  mean.total = mean.recompute_total();
  return mean;
}

void push_log(std::vector<LossLogRow>* log, int batch, int round, int iter,
              const LossBreakdown& l) {
  if (log) log->push_back({batch, round, iter, l.e_pho, l.e_geo, l.e_normal, l.total});
}

double scene_extent(const GaussianMap& map) {
  Vec3 lo = Vec3::Constant(std::numeric_limits<double>::max());
  Vec3 hi = -lo;
  bool any = false;
  for (size_t i = 0; i < map.size(); ++i) {
    if (map.meta(static_cast<int>(i)).sky) continue;
    lo = lo.cwiseMin(map.primitive(static_cast<int>(i)).mean);
    hi = hi.cwiseMax(map.primitive(static_cast<int>(i)).mean);
    any = true;
  }
  return any ? std::max((hi - lo).norm(), 1e-6) : 1.0;
}

struct AdamState {
  std::vector<double> m, v;
  void init(size_t n) {
    m.assign(n, 0.0);
    v.assign(n, 0.0);
  }
  // one scalar update, returns the step to subtract
  double step(size_t i, double grad, double lr, int t) {
    constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
    m[i] = b1 * m[i] + (1 - b1) * grad;
    v[i] = b2 * v[i] + (1 - b2) * grad * grad;
    const double mh = m[i] / (1 - std::pow(b1, t));
    const double vh = v[i] / (1 - std::pow(b2, t));
    return lr * mh / (std::sqrt(vh) + eps);
  }
};

}  // namespace

void optimize_poses(const GaussianMap& map, std::vector<KeyframeRecord*>& window,
                    const CameraModel& cam, const BackendParams& params, int batch,
                    std::vector<LossLogRow>* log) {
  std::vector<KeyframeRecord*> free_kfs;
  for (KeyframeRecord* kf : window)
    if (kf->insertion_event != 0) free_kfs.push_back(kf);
  if (free_kfs.empty() || params.pose_iterations <= 0) return;

  const double k_inv = 1.0 / static_cast<double>(window.size());
  LossBreakdown current = mean_window_loss(map, window, cam, params);

  for (int iter = 0; iter < params.pose_iterations; ++iter) {
    push_log(log, batch, 1, iter, current);

    std::vector<Vec6> grads(free_kfs.size());
    for (size_t i = 0; i < free_kfs.size(); ++i) {
      RenderBuffer buf;
      compute_loss(map, *free_kfs[i], cam, params.lambda1, params.lambda2, &buf);
      Image d_color;
      Grid d_depth;
      loss_upstream(buf, *free_kfs[i], params.lambda1, d_color, d_depth);
      const RenderGradients g = render_with_gradients(map.primitives(), free_kfs[i]->pose,
                                                      cam, d_color, d_depth);
      grads[i] = k_inv * g.d_pose;
    }

    std::vector<PoseSE3> saved(free_kfs.size());
    for (size_t i = 0; i < free_kfs.size(); ++i) saved[i] = free_kfs[i]->pose;

    double eta = params.pose_step;
    bool accepted = false;
    for (int attempt = 0; attempt < 6; ++attempt) {
      for (size_t i = 0; i < free_kfs.size(); ++i)
        free_kfs[i]->pose = saved[i] * PoseSE3::exp(eta * grads[i]);
      const LossBreakdown trial = mean_window_loss(map, window, cam, params);
      if (trial.total <= current.total) {
        current = trial;
        accepted = true;
        break;
      }
      eta *= 0.5;
    }
    if (!accepted) {
      for (size_t i = 0; i < free_kfs.size(); ++i) free_kfs[i]->pose = saved[i];
      break;  // stationary within line-search resolution
    }
  }
  push_log(log, batch, 1, params.pose_iterations, current);
}

void optimize_map(GaussianMap& map, const std::vector<KeyframeRecord*>& window,
                  const CameraModel& cam, const BackendParams& params, int batch,
                  std::vector<LossLogRow>* log) {
  const size_t n = map.size();
  if (n == 0 || window.empty()) return;
  const double k_inv = 1.0 / static_cast<double>(window.size());

  AdamState adam_mean, adam_scales, adam_rot, adam_opacity, adam_color;
  adam_mean.init(3 * n);
  adam_scales.init(3 * n);
  adam_rot.init(4 * n);
  adam_opacity.init(n);
  adam_color.init(3 * n);
  const double lr_mean = params.rates.mean * scene_extent(map);

  std::vector<uint8_t> touched(n, 0);

  for (int iter = 0; iter < params.map_iterations; ++iter) {
    RenderGradients acc;
    acc.resize(n);
    LossBreakdown mean_loss;
    mean_loss.lambda1 = params.lambda1;
    mean_loss.lambda2 = params.lambda2;
    std::vector<uint8_t> visible(n, 0);

    for (const KeyframeRecord* kf : window) {
      RenderBuffer buf;
      const LossBreakdown l = compute_loss(map, *kf, cam, params.lambda1, params.lambda2, &buf);
      mean_loss.e_pho += l.e_pho * k_inv;
      mean_loss.e_geo += l.e_geo * k_inv;
      mean_loss.e_normal += l.e_normal * k_inv;

      Image d_color;
      Grid d_depth;
      loss_upstream(buf, *kf, params.lambda1, d_color, d_depth);
      const RenderGradients g =
          render_with_gradients(map.primitives(), kf->pose, cam, d_color, d_depth);
      for (size_t i = 0; i < n; ++i) {
        acc.d_mean[i] += k_inv * g.d_mean[i];
        acc.d_log_scales[i] += k_inv * g.d_log_scales[i];
        acc.d_rotation[i] += k_inv * g.d_rotation[i];
        acc.d_opacity[i] += k_inv * g.d_opacity[i];
        acc.d_color[i] += k_inv * g.d_color[i];
      }

      const std::vector<int> vis = visible_primitives(map, kf->pose, cam);
      const double normal_scale =
          vis.empty() ? 0.0 : params.lambda2 * k_inv / static_cast<double>(vis.size());
      for (int idx : vis) {
        visible[idx] = 1;
        GaussianPrimitive& p = map.primitive(idx);
        const int axis = p.shortest_axis();
        acc.d_log_scales[idx][axis] += normal_scale * p.smallest_scale();
      }
    }
    mean_loss.total = mean_loss.recompute_total();
    push_log(log, batch, 2, iter, mean_loss);

    const int t = iter + 1;
    for (size_t i = 0; i < n; ++i) {
      if (!visible[i]) continue;
      touched[i] = 1;
      GaussianPrimitive& g = map.primitive(static_cast<int>(i));
      for (int k = 0; k < 3; ++k) {
        g.mean[k] -= adam_mean.step(3 * i + k, acc.d_mean[i][k], lr_mean, t);
        g.log_scales[k] -=
            adam_scales.step(3 * i + k, acc.d_log_scales[i][k], params.rates.log_scales, t);
        g.color[k] -= adam_color.step(3 * i + k, acc.d_color[i][k], params.rates.color, t);
        g.color[k] = std::clamp(g.color[k], 0.0, 1.0);
      }
      g.clamp_scales();

      Vec4 q(g.rotation.x(), g.rotation.y(), g.rotation.z(), g.rotation.w());
      for (int k = 0; k < 4; ++k)
        q[k] -= adam_rot.step(4 * i + k, acc.d_rotation[i][k], params.rates.rotation, t);
      g.rotation = Quat(q[3], q[0], q[1], q[2]).normalized();

      const double alpha = std::clamp(g.opacity, 1e-4, 1.0 - 1e-4);
      const double d_logit = acc.d_opacity[i] * alpha * (1.0 - alpha);
      double logit = std::log(alpha / (1.0 - alpha));
      logit -= adam_opacity.step(i, d_logit, params.rates.opacity, t);
      g.opacity = std::clamp(1.0 / (1.0 + std::exp(-logit)), 1e-4, 1.0 - 1e-4);

      // guard against a diverged step
      if (!g.mean.allFinite() || !g.log_scales.allFinite() || !g.color.allFinite() ||
          !std::isfinite(g.opacity) || !g.rotation.coeffs().allFinite()) {
        g.mean = g.mean.allFinite() ? g.mean : Vec3::Zero();
        g.log_scales = g.log_scales.allFinite() ? g.log_scales : Vec3::Zero();
        g.color = g.color.allFinite() ? g.color : Vec3::Constant(0.5);
        if (!std::isfinite(g.opacity)) g.opacity = 1e-4;
        if (!g.rotation.coeffs().allFinite()) g.rotation = Quat::Identity();
      }
    }
    map.mark_dirty();
  }

  // Survivors of the round become reliable; everyone optimized counts a round.
  for (size_t i = 0; i < n; ++i) {
    if (!touched[i]) continue;
    map.meta(static_cast<int>(i)).opt_rounds += 1;
    if (!map.meta(static_cast<int>(i)).sky) map.primitive(static_cast<int>(i)).reliable = true;
  }
  map.prune(params.opacity_floor, params.stale_window);
}

void Backend::step(GaussianMap& map, std::vector<KeyframeRecord> new_keyframes) {
  if (new_keyframes.empty()) return;
  int latest_frame = 0;
  for (KeyframeRecord& kf : new_keyframes) {
    kf.insertion_event = map.insertion_events();
    map.insert_keyframe_points(kf.frame, kf.pose, cam_, params_.insert);
    latest_frame = std::max(latest_frame, kf.frame.index);
    keyframes_.push_back(std::move(kf));
  }

  // Re-anchor color-only primitives before optimization.
  std::vector<int> unreliable;
  for (size_t i = 0; i < map.size(); ++i)
    if (!map.primitive(static_cast<int>(i)).reliable && !map.meta(static_cast<int>(i)).sky)
      unreliable.push_back(static_cast<int>(i));
  if (!unreliable.empty()) {
    try {
      conditional_split(map, unreliable, latest_frame);
    } catch (const NoReliableAnchor&) {
      // deferred until an anchor exists
    }
  }

  const size_t wsize = std::min<size_t>(keyframes_.size(),
                                        static_cast<size_t>(params_.batch_keyframes));
  std::vector<KeyframeRecord*> window;
  for (size_t i = keyframes_.size() - wsize; i < keyframes_.size(); ++i)
    window.push_back(&keyframes_[i]);

  optimize_poses(map, window, cam_, params_, batches_, &log_);
  optimize_map(map, window, cam_, params_, batches_, &log_);
  ++batches_;
}

}  // namespace gslam
