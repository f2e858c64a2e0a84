#pragma once

#include <vector>

#include "gslam/core/camera.hpp"
#include "gslam/core/gaussian.hpp"
#include "gslam/ingest/frame.hpp"
#include "gslam/map/kdtree.hpp"

namespace gslam {

/// Map-side bookkeeping that is not part of the primitive itself.
struct PrimitiveMeta {
  int insertion_event = -1;  // -1 keeps a primitive out of the tracking window
  int opt_rounds = 0;        // back-end rounds this primitive took part in
  bool sky = false;
};

struct InsertOptions {
  double ray_stretch = 2.0;   // ray-direction scale relative to the tangential one
  double init_opacity = 0.5;
  int window_events = 10;     // insertion events covered by the tracking submap
  double radius_factor = 3.0; // neighborhood radius as a multiple of median spacing
};

enum class DensityMode { exact, fast };

struct DensityQuery {
  Vec3 x = Vec3::Zero();
  double radius = 0.0;
};

/// The Gaussian map: primitive storage, the sliding-window tracking submap
/// with its spatial index and cached weights, and the map-update operations.
class GaussianMap {
 public:
  size_t size() const { return prims_.size(); }
  bool empty() const { return prims_.empty(); }

  GaussianPrimitive& primitive(int i) { return prims_[i]; }
  const GaussianPrimitive& primitive(int i) const { return prims_[i]; }
  std::vector<GaussianPrimitive>& primitives() { return prims_; }
  const std::vector<GaussianPrimitive>& primitives() const { return prims_; }

  PrimitiveMeta& meta(int i) { return meta_[i]; }
  const PrimitiveMeta& meta(int i) const { return meta_[i]; }

  int insertion_events() const { return events_; }

  /// Append a primitive outside any insertion event (tests, PLY import).
  int add(const GaussianPrimitive& g, const PrimitiveMeta& m = {});

  /// One keyframe insertion event: a primitive per LiDAR point with a valid
  /// normal that lands inside the image. Returns the number inserted.
  int insert_keyframe_points(const Frame& frame, const PoseSE3& world_pose,
                             const CameraModel& cam, const InsertOptions& opts = {});

  /// Count an insertion event without inserting (tests of the window rule).
  void bump_event() { ++events_; mark_dirty(); }

  /// Distant hemisphere shell for unbounded backgrounds; excluded from the
  /// tracking window, rendered like everything else.
  int init_skybox(int n, double radius, uint64_t seed = 1234);

  /// Drop low-opacity primitives that have been through at least one back-end
  /// round, except window members whose weight is above the window median.
  int prune(double opacity_floor = 0.05, int stale_window = 10);

  /// Tracking submap: primitives born within the last `window_events`
  /// insertion events, sky excluded. Indices into the map.
  const std::vector<int>& submap_indices() const;
  const KdTree3& submap_tree() const;        // over submap means
  double submap_radius() const;              // radius_factor x median NN spacing
  double submap_weight(int submap_pos) const;

  /// Density rho(x) over the whole map (fast mode applies the simplified
  /// quadratic form used while tracking).
  double density(const DensityQuery& q, DensityMode mode = DensityMode::exact) const;

  /// Normal-consistency-times-density weight of one primitive.
  double weight(int prim_index, double radius) const;

  void set_options(const InsertOptions& opts) { opts_ = opts; mark_dirty(); }
  const InsertOptions& options() const { return opts_; }

  void mark_dirty() { dirty_ = true; }

 private:
  void rebuild_submap() const;

  std::vector<GaussianPrimitive> prims_;
  std::vector<PrimitiveMeta> meta_;
  int events_ = 0;
  InsertOptions opts_;

  // submap cache, rebuilt lazily after insertion/removal batches
  mutable bool dirty_ = true;
  mutable std::vector<int> submap_;
  mutable KdTree3 submap_tree_;
  mutable std::vector<double> submap_weights_;
  mutable double submap_radius_ = 0.0;
};

/// Normal-frame covariance used by the density weighting:
/// Sigma' = D diag(1, sp1/sa, sp2/sa) D^T, D's first column the normal,
/// sa the smallest axis scale and sp1 <= sp2 the perpendicular ones.
Mat3 reconstruct_covariance(const GaussianPrimitive& g);

}  // namespace gslam
