#include "gslam/map/conditional_split.hpp"

#include "gslam/core/errors.hpp"
#include "gslam/core/rng.hpp"

namespace gslam {

Vec3 sample_from_primitive(const GaussianPrimitive& anchor, uint64_t frame_key,
                           uint64_t prim_key) {
  Rng rng = Rng::from_keys(frame_key, prim_key);
  const Vec3 z(rng.gaussian(), rng.gaussian(), rng.gaussian());
  const Mat3 R = anchor.rotation.toRotationMatrix();
  return anchor.mean + R * anchor.scales().cwiseProduct(z);
}

int conditional_split(GaussianMap& map, const std::vector<int>& unreliable, int frame_index) {
  if (unreliable.empty()) return 0;

  std::vector<int> anchors;
  std::vector<Vec3> anchor_means;
  for (size_t i = 0; i < map.size(); ++i) {
    if (map.primitive(static_cast<int>(i)).reliable && !map.meta(static_cast<int>(i)).sky) {
      anchors.push_back(static_cast<int>(i));
      anchor_means.push_back(map.primitive(static_cast<int>(i)).mean);
    }
  }
  if (anchors.empty()) throw NoReliableAnchor();

  KdTree3 tree(std::move(anchor_means));
  int updated = 0;
  for (int idx : unreliable) {
    GaussianPrimitive& x = map.primitive(idx);
    if (x.reliable) continue;
    const int nearest = tree.nearest(x.mean);
    const GaussianPrimitive& y = map.primitive(anchors[nearest]);

    x.mean = sample_from_primitive(y, static_cast<uint64_t>(frame_index),
                                   static_cast<uint64_t>(idx));
    x.rotation = y.rotation;
    x.log_scales = y.log_scales;
    x.normal_sign = y.normal_sign;
    // color, opacity kept; stays unreliable until it survives optimization
    ++updated;
  }
  if (updated > 0) map.mark_dirty();
  return updated;
}

}  // namespace gslam
