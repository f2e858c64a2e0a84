#include "gslam/sim/scene.hpp"

#include <cmath>
#include <limits>

#include "gslam/core/rng.hpp"

namespace gslam::sim {

namespace {

constexpr double kRayEps = 1e-9;

std::optional<Hit> hit_plane(const Surface& s, const Vec3& o, const Vec3& d) {
  const Vec3 n = s.axis_u.cross(s.axis_v).normalized();
  const double denom = n.dot(d);
  if (std::abs(denom) < 1e-12) return std::nullopt;
  const double t = n.dot(s.origin - o) / denom;
  if (t <= kRayEps) return std::nullopt;
  const Vec3 p = o + t * d;
  const Vec3 rel = p - s.origin;
  if (std::abs(rel.dot(s.axis_u)) > s.half_u || std::abs(rel.dot(s.axis_v)) > s.half_v)
    return std::nullopt;
  Hit h;
  h.range = t;
  h.point = p;
  h.normal = denom < 0.0 ? n : -n;
  return h;
}

std::optional<Hit> hit_box(const Surface& s, const Vec3& o, const Vec3& d) {
  const Vec3 lo = s.origin - s.half_size;
  const Vec3 hi = s.origin + s.half_size;
  double t0 = kRayEps, t1 = std::numeric_limits<double>::max();
  int axis = -1;
  for (int k = 0; k < 3; ++k) {
    if (std::abs(d[k]) < 1e-15) {
      if (o[k] < lo[k] || o[k] > hi[k]) return std::nullopt;
      continue;
    }
    double near = (lo[k] - o[k]) / d[k];
    double far = (hi[k] - o[k]) / d[k];
    if (near > far) std::swap(near, far);
    if (near > t0) {
      t0 = near;
      axis = k;
    }
    t1 = std::min(t1, far);
    if (t0 > t1) return std::nullopt;
  }
  if (axis < 0) return std::nullopt;  // origin inside the box
  Hit h;
  h.range = t0;
  h.point = o + t0 * d;
  Vec3 n = Vec3::Zero();
  n[axis] = d[axis] > 0.0 ? -1.0 : 1.0;
  h.normal = n;
  return h;
}

std::optional<Hit> hit_sphere(const Surface& s, const Vec3& o, const Vec3& d) {
  const Vec3 oc = o - s.origin;
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - s.radius * s.radius;
  const double disc = b * b - c;
  if (disc < 0.0) return std::nullopt;
  const double sq = std::sqrt(disc);
  double t = -b - sq;
  if (t <= kRayEps) t = -b + sq;
  if (t <= kRayEps) return std::nullopt;
  Hit h;
  h.range = t;
  h.point = o + t * d;
  Vec3 n = (h.point - s.origin).normalized();
  if (n.dot(d) > 0.0) n = -n;
  h.normal = n;
  return h;
}

}  // namespace

Vec3 Surface::albedo_at(const Vec3& point) const {
  if (checker <= 0.0) return color_a;
  double pu = 0.0, pv = 0.0;
  switch (kind) {
    case Kind::plane: {
      const Vec3 rel = point - origin;
      pu = rel.dot(axis_u);
      pv = rel.dot(axis_v);
      break;
    }
    case Kind::box: {
      const Vec3 rel = point - origin;
      Vec3 t = rel.cwiseQuotient(half_size).cwiseAbs();
      int face;
      t.maxCoeff(&face);
      pu = rel[(face + 1) % 3];
      pv = rel[(face + 2) % 3];
      break;
    }
    case Kind::sphere: {
      const Vec3 rel = (point - origin) / radius;
      pu = std::atan2(rel.y(), rel.x()) * radius;
      pv = std::acos(std::clamp(rel.z(), -1.0, 1.0)) * radius;
      break;
    }
  }
  const long iu = static_cast<long>(std::floor(pu / checker));
  const long iv = static_cast<long>(std::floor(pv / checker));
  return ((iu + iv) % 2 + 2) % 2 == 0 ? color_a : color_b;
}

std::optional<Hit> raycast(const SceneSpec& scene, const Vec3& origin, const Vec3& dir,
                           double max_range) {
  std::optional<Hit> best;
  for (size_t i = 0; i < scene.surfaces.size(); ++i) {
    const Surface& s = scene.surfaces[i];
    std::optional<Hit> h;
    switch (s.kind) {
      case Surface::Kind::plane: h = hit_plane(s, origin, dir); break;
      case Surface::Kind::box: h = hit_box(s, origin, dir); break;
      case Surface::Kind::sphere: h = hit_sphere(s, origin, dir); break;
    }
    if (!h || h->range > max_range) continue;
    if (!best || h->range < best->range) {
      h->surface = static_cast<int>(i);
      best = h;
    }
  }
  return best;
}

SceneSpec corridor_scene(double length, uint64_t seed) {
  // Camera convention: +z forward, +y down. A floor below the sensor and two
  // side walls, all checkered so photometric terms have texture to lock onto.
  SceneSpec scene;
  scene.extent = length;
  scene.seed = seed;
  const double half_len = 0.5 * length;

  Surface floor;
  floor.kind = Surface::Kind::plane;
  floor.origin = Vec3(0.0, 1.0, half_len);
  floor.axis_u = Vec3::UnitX();
  floor.axis_v = Vec3::UnitZ();
  floor.half_u = 1.6;
  floor.half_v = half_len + 2.0;
  floor.color_a = Vec3(0.75, 0.55, 0.30);
  floor.color_b = Vec3(0.35, 0.25, 0.15);
  floor.checker = 0.5;
  scene.surfaces.push_back(floor);

  Surface left = floor;
  left.origin = Vec3(-1.6, 0.0, half_len);
  left.axis_u = Vec3::UnitY();
  left.axis_v = Vec3::UnitZ();
  left.half_u = 1.2;
  left.half_v = half_len + 2.0;
  left.color_a = Vec3(0.25, 0.45, 0.75);
  left.color_b = Vec3(0.85, 0.85, 0.85);
  left.checker = 0.4;
  scene.surfaces.push_back(left);

  Surface right = left;
  right.origin = Vec3(1.6, 0.0, half_len);
  right.color_a = Vec3(0.75, 0.30, 0.30);
  right.color_b = Vec3(0.9, 0.85, 0.6);
  right.checker = 0.6;
  scene.surfaces.push_back(right);

  Surface ceiling = floor;
  ceiling.origin = Vec3(0.0, -1.2, half_len);
  ceiling.color_a = Vec3(0.6, 0.6, 0.65);
  ceiling.color_b = Vec3(0.4, 0.4, 0.45);
  ceiling.checker = 0.7;
  scene.surfaces.push_back(ceiling);

  return scene;
}

SceneSpec plane_scene(double distance, uint64_t seed) {
  SceneSpec scene;
  scene.extent = distance * 2.0;
  scene.seed = seed;
  Surface wall;
  wall.kind = Surface::Kind::plane;
  wall.origin = Vec3(0.0, 0.0, distance);
  wall.axis_u = Vec3::UnitX();
  wall.axis_v = Vec3::UnitY();
  wall.half_u = 2.0 * distance;
  wall.half_v = 2.0 * distance;
  wall.color_a = Vec3(0.8, 0.3, 0.2);
  wall.color_b = Vec3(0.2, 0.5, 0.8);
  wall.checker = 0.3 * distance;
  scene.surfaces.push_back(wall);
  return scene;
}

SceneSpec sphere_scene(int count, double extent, uint64_t seed) {
  SceneSpec scene;
  scene.extent = extent;
  scene.seed = seed;
  Rng rng(seed);
  for (int i = 0; i < count; ++i) {
    Surface s;
    s.kind = Surface::Kind::sphere;
    s.origin = Vec3(rng.uniform(-0.4, 0.4) * extent, rng.uniform(-0.2, 0.2) * extent,
                    rng.uniform(0.3, 1.0) * extent);
    s.radius = rng.uniform(0.05, 0.15) * extent;
    s.color_a = Vec3(rng.uniform(0.2, 0.9), rng.uniform(0.2, 0.9), rng.uniform(0.2, 0.9));
    scene.surfaces.push_back(s);
  }
  return scene;
}

}  // namespace gslam::sim
