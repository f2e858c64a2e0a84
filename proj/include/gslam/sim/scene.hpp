#pragma once

#include <optional>
#include <vector>

#include "gslam/core/gaussian.hpp"

namespace gslam::sim {

/// One parametric surface with flat or checkerboard albedo.
struct Surface {
  enum class Kind { plane, box, sphere };
  Kind kind = Kind::plane;

  // plane patch: origin, unit in-plane axes, half extents; normal = u x v
  Vec3 origin = Vec3::Zero();
  Vec3 axis_u = Vec3::UnitX();
  Vec3 axis_v = Vec3::UnitY();
  double half_u = 1.0, half_v = 1.0;

  // box: axis-aligned, reuses origin as center
  Vec3 half_size = Vec3::Ones();

  // sphere: reuses origin as center
  double radius = 1.0;

  Vec3 color_a = Vec3::Constant(0.7);
  Vec3 color_b = Vec3::Constant(0.3);
  double checker = 0.0;  // cell size in scene units; 0 = flat color_a

  Vec3 albedo_at(const Vec3& point) const;
};

struct Hit {
  double range = 0.0;
  Vec3 point = Vec3::Zero();
  Vec3 normal = Vec3::Zero();  // faces the ray origin
  int surface = -1;
};

/// Ground-truth scene: parametric surfaces for ray casting, or Gaussian
/// primitives rendered with the production rasterizer.
struct SceneSpec {
  std::vector<Surface> surfaces;
  std::vector<GaussianPrimitive> primitives;
  Vec3 background = Vec3::Zero();
  double extent = 10.0;
  uint64_t seed = 0;
};

/// First intersection along origin + t * dir (dir unit), t > 1e-9.
std::optional<Hit> raycast(const SceneSpec& scene, const Vec3& origin, const Vec3& dir,
                           double max_range);

/// Prefabricated scenes used by the datasets and the test suites.
SceneSpec corridor_scene(double length, uint64_t seed);
SceneSpec plane_scene(double distance, uint64_t seed);
SceneSpec sphere_scene(int count, double extent, uint64_t seed);

}  // namespace gslam::sim
