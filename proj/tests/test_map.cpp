#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <chrono>

#include "gslam/core/errors.hpp"
#include "gslam/map/conditional_split.hpp"
#include "gslam/map/gaussian_map.hpp"
#include "gslam/reference/brute_force.hpp"
#include "gslam/sim/simulate.hpp"
#include "helpers.hpp"

using namespace gslam;
using test_helpers::random_primitive;
using test_helpers::random_vec;
using test_helpers::test_camera;

namespace {

GaussianPrimitive at(const Vec3& mean, double opacity = 0.5) {
  GaussianPrimitive g;
  g.mean = mean;
  g.opacity = opacity;
  g.reliable = true;
  return g;
}

}  // namespace

TEST_CASE("submap window covers the last 10 insertion events") {
  GaussianMap map;
  for (int event = 0; event < 15; ++event) {
    map.add(at(Vec3(event, 0, 0)), {event, 0, false});
    map.bump_event();
  }
  const auto& sub = map.submap_indices();
  CHECK(sub.size() == 10);
  for (int idx : sub) CHECK(map.meta(idx).insertion_event >= 5);

  // partition: submap plus masked-out equals the whole map
  CHECK(sub.size() + (map.size() - sub.size()) == map.size());
}

TEST_CASE("single-event map is fully inside the window") {
  GaussianMap map;
  for (int i = 0; i < 7; ++i) map.add(at(Vec3(i, 0, 0)), {0, 0, false});
  map.bump_event();
  CHECK(map.submap_indices().size() == 7);
}

TEST_CASE("reconstruct_covariance of an isotropic primitive is the identity") {
  GaussianPrimitive g;
  g.log_scales = Vec3::Constant(std::log(0.7));
  CHECK((reconstruct_covariance(g) - Mat3::Identity()).norm() < 1e-12);
}

TEST_CASE("reconstruct_covariance axis-aligned case") {
  GaussianPrimitive g;
  g.log_scales = Vec3(std::log(0.1), std::log(1.0), std::log(2.0));
  const Mat3 sigma = reconstruct_covariance(g);
  CHECK(sigma(0, 0) == doctest::Approx(1.0));
  CHECK(sigma(1, 1) == doctest::Approx(10.0));
  CHECK(sigma(2, 2) == doctest::Approx(20.0));
}

TEST_CASE("reconstruct_covariance smallest eigenvalue is 1 along the normal") {
  std::mt19937 rng(31);
  for (int i = 0; i < 100; ++i) {
    GaussianPrimitive g = random_primitive(rng);
    g.log_scales = Vec3(-1.7, -0.4, 0.2);  // distinct axes
    const Mat3 sigma = reconstruct_covariance(g);
    Eigen::SelfAdjointEigenSolver<Mat3> eig(sigma);
    CHECK(eig.eigenvalues()[0] == doctest::Approx(1.0).epsilon(1e-9));
    const double cosa = std::abs(eig.eigenvectors().col(0).dot(g.normal()));
    CHECK(std::acos(std::min(cosa, 1.0)) < 1e-6);
  }
}

TEST_CASE("density at a primitive mean equals its opacity") {
  GaussianMap map;
  map.add(at(Vec3(1, 2, 3), 0.7));
  CHECK(map.density({Vec3(1, 2, 3), 1.0}, DensityMode::exact) == doctest::Approx(0.7));
  CHECK(map.density({Vec3(1, 2, 3), 1.0}, DensityMode::fast) == doctest::Approx(0.7));
}

TEST_CASE("density adds over coincident primitives") {
  GaussianMap map;
  map.add(at(Vec3(0, 0, 0), 0.5));
  map.add(at(Vec3(0, 0, 0), 0.5));
  CHECK(map.density({Vec3(0, 0, 0), 1.0}, DensityMode::exact) == doctest::Approx(1.0));
}

TEST_CASE("exact density matches the dense brute-force oracle") {
  std::mt19937 rng(37);
  GaussianMap map;
  std::vector<GaussianPrimitive> prims;
  for (int i = 0; i < 20; ++i) {
    GaussianPrimitive g = random_primitive(rng, 1.5);
    prims.push_back(g);
    map.add(g);
  }
  for (int q = 0; q < 300; ++q) {
    const Vec3 x = random_vec(rng, -2.0, 2.0);
    const double r = 1.0 + 2.0 * (q % 3);
    const double expected = reference::brute_density(prims, x, r);
    CHECK(map.density({x, r}, DensityMode::exact) == doctest::Approx(expected).epsilon(1e-9));
  }
}

TEST_CASE("empty neighborhood gives zero density") {
  GaussianMap map;
  map.add(at(Vec3(100, 0, 0)));
  CHECK(map.density({Vec3(0, 0, 0), 1.0}, DensityMode::exact) == 0.0);
}

TEST_CASE("density is monotone under adding a primitive inside the radius") {
  std::mt19937 rng(41);
  GaussianMap map;
  for (int i = 0; i < 10; ++i) map.add(random_primitive(rng));
  const DensityQuery q{Vec3(0.2, 0.1, -0.3), 2.0};
  const double before = map.density(q, DensityMode::exact);
  map.add(at(Vec3(0.5, 0, 0), 0.4));
  CHECK(map.density(q, DensityMode::exact) >= before);
}

TEST_CASE("weight of co-planar identical normals equals the density") {
  GaussianMap map;
  for (int i = 0; i < 9; ++i) {
    GaussianPrimitive g = at(Vec3(0.1 * (i % 3), 0.1 * (i / 3), 0.0));
    g.log_scales = Vec3(std::log(0.02), std::log(0.1), std::log(0.1));  // normal = +x? no: axis 0
    g.rotation = Quat::Identity();
    map.add(g);
  }
  // all normals identical (+x axis is shortest): consistency is 1
  const double w = map.weight(4, 0.5);
  const double rho = map.density({map.primitive(4).mean, 0.5}, DensityMode::exact);
  CHECK(w == doctest::Approx(rho).epsilon(1e-12));
}

TEST_CASE("weight clamps to zero for an orthogonal normal") {
  GaussianMap map;
  // cluster with normals along +z (shortest axis = z)
  for (int i = 0; i < 6; ++i) {
    GaussianPrimitive g = at(Vec3(0.05 * i, 0, 0));
    g.log_scales = Vec3(std::log(0.1), std::log(0.1), std::log(0.01));
    map.add(g);
  }
  // one primitive whose normal is along +x
  GaussianPrimitive odd = at(Vec3(0.1, 0.05, 0));
  odd.log_scales = Vec3(std::log(0.01), std::log(0.1), std::log(0.1));
  const int idx = map.add(odd);
  const double w = map.weight(idx, 0.5);
  // the average of many z-normals against an x-normal: consistency ~ small;
  // after clamping the weight stays nonnegative
  CHECK(w >= 0.0);
  CHECK(w < map.density({odd.mean, 0.5}, DensityMode::exact) * 0.5);
}

TEST_CASE("plane primitives out-weigh isolated outliers") {
  std::mt19937 rng(43);
  GaussianMap map;
  std::vector<int> plane_idx, outlier_idx;
  for (int i = 0; i < 50; ++i) {
    GaussianPrimitive g = at(Vec3(random_vec(rng).x(), random_vec(rng).y(), 0.0));
    g.log_scales = Vec3(std::log(0.1), std::log(0.1), std::log(0.01));
    plane_idx.push_back(map.add(g));
  }
  for (int i = 0; i < 5; ++i) {
    GaussianPrimitive g = random_primitive(rng);
    g.mean += Vec3(0, 0, 5.0 + i);
    outlier_idx.push_back(map.add(g));
  }
  double mean_plane = 0, mean_out = 0;
  for (int i : plane_idx) mean_plane += map.weight(i, 0.8) / plane_idx.size();
  for (int i : outlier_idx) mean_out += map.weight(i, 0.8) / outlier_idx.size();
  CHECK(mean_plane > 3.0 * mean_out);
}

TEST_CASE("keyframe insertion makes one reliable primitive per visible point") {
  CameraModel cam = test_camera(64, 48);
  Frame frame;
  frame.index = 4;
  frame.image = Image(64, 48, Vec3(0.2, 0.4, 0.6));
  for (int i = 0; i < 1000; ++i) {
    const double x = -0.4 + 0.8 * (i % 25) / 24.0;
    const double y = -0.3 + 0.6 * (i / 25) / 39.0;
    frame.cloud.points.emplace_back(x, y, 2.0);
    frame.cloud.normals.emplace_back(0, 0, -1);
    frame.cloud.normal_valid.push_back(1);
  }
  GaussianMap map;
  const int inserted = map.insert_keyframe_points(frame, PoseSE3(), cam, {});
  CHECK(inserted == 1000);
  CHECK(map.size() == 1000);
  for (size_t i = 0; i < map.size(); ++i) {
    CHECK(map.primitive(i).reliable);
    CHECK(map.primitive(i).birth_frame == 4);
    CHECK((map.primitive(i).color - Vec3(0.2, 0.4, 0.6)).norm() < 0.01);
  }
}

TEST_CASE("insertion footprint follows depth over focal length") {
  CameraModel cam;
  cam.fx = cam.fy = 500;
  cam.cx = 32;
  cam.cy = 24;
  cam.width = 64;
  cam.height = 48;
  Frame frame;
  frame.image = Image(64, 48);
  frame.cloud.points.emplace_back(0, 0, 10.0);
  frame.cloud.normals.emplace_back(0, 0, -1);
  frame.cloud.normal_valid.push_back(1);
  GaussianMap map;
  InsertOptions opts;
  opts.ray_stretch = 2.0;
  map.insert_keyframe_points(frame, PoseSE3(), cam, opts);
  REQUIRE(map.size() == 1);
  const Vec3 s = map.primitive(0).scales();
  CHECK(s[0] == doctest::Approx(10.0 / 500.0));
  CHECK(s[1] == doctest::Approx(10.0 / 500.0));
  CHECK(s[2] == doctest::Approx(2.0 * 10.0 / 500.0));  // stretched along the ray
}

TEST_CASE("inserted colors match ground-truth surface colors") {
  CameraModel cam = test_camera(96, 72);
  const auto scene = sim::plane_scene(2.0, 5);
  const PoseSE3 pose;  // at origin, looking at the wall
  sim::LidarPattern pattern;
  pattern.rays = 800;
  PointCloud cloud = sim::simulate_lidar(scene, pose, pattern);

  Frame frame;
  frame.index = 0;
  frame.image = sim::simulate_camera(scene, pose, cam);
  frame.cloud = cloud;

  GaussianMap map;
  map.insert_keyframe_points(frame, pose, cam, {});
  REQUIRE(map.size() > 100);
  int bad = 0;
  for (size_t i = 0; i < map.size(); ++i) {
    const Vec3 gt = scene.surfaces[0].albedo_at(map.primitive(i).mean);
    if ((map.primitive(i).color - gt).cwiseAbs().maxCoeff() > 0.05) ++bad;
  }
  // bilinear samples straddling checker edges may differ; the bulk must match
  CHECK(bad < static_cast<int>(map.size()) / 10);
}

TEST_CASE("conditional split re-anchors onto the nearest reliable primitive") {
  GaussianMap map;
  GaussianPrimitive anchor = at(Vec3(0, 0, 0), 0.9);
  anchor.log_scales = Vec3::Zero();  // isotropic unit
  map.add(anchor);

  std::vector<int> unreliable;
  for (int i = 0; i < 10000; ++i) {
    GaussianPrimitive g = at(Vec3(3, 3, 3), 0.3);
    g.reliable = false;
    g.color = Vec3(0.1, 0.9, 0.1);
    unreliable.push_back(map.add(g));
  }
  const int updated = conditional_split(map, unreliable, 7);
  CHECK(updated == 10000);

  Vec3 mean = Vec3::Zero();
  for (int idx : unreliable) mean += map.primitive(idx).mean / 10000.0;
  CHECK(mean.norm() < 0.05);

  Mat3 cov = Mat3::Zero();
  for (int idx : unreliable) {
    const Vec3 d = map.primitive(idx).mean - mean;
    cov += d * d.transpose() / 10000.0;
  }
  CHECK((cov - Mat3::Identity()).norm() < 0.1 * Mat3::Identity().norm() * 3.0);

  // 99% of Mahalanobis distances below the chi-squared(3) 0.99 quantile
  int below = 0;
  for (int idx : unreliable)
    if (map.primitive(idx).mean.squaredNorm() < 11.345) ++below;
  CHECK(below >= 9900 - 150);

  for (int idx : unreliable) {
    CHECK_FALSE(map.primitive(idx).reliable);            // still unreliable
    CHECK(map.primitive(idx).color == Vec3(0.1, 0.9, 0.1));  // color kept
    CHECK(map.primitive(idx).opacity == doctest::Approx(0.3));
  }
}

TEST_CASE("conditional split on an empty unreliable set is a no-op") {
  GaussianMap map;
  map.add(at(Vec3(0, 0, 0)));
  CHECK(conditional_split(map, {}, 0) == 0);
}

TEST_CASE("conditional split without reliable anchors throws") {
  GaussianMap map;
  GaussianPrimitive g = at(Vec3(0, 0, 0));
  g.reliable = false;
  const int idx = map.add(g);
  CHECK_THROWS_AS(conditional_split(map, {idx}, 0), NoReliableAnchor);
}

TEST_CASE("conditional split preserves the primitive count") {
  std::mt19937 rng(47);
  GaussianMap map;
  map.add(at(Vec3(0, 0, 0)));
  std::vector<int> unreliable;
  for (int i = 0; i < 50; ++i) {
    GaussianPrimitive g = random_primitive(rng);
    g.reliable = false;
    unreliable.push_back(map.add(g));
  }
  const size_t before = map.size();
  conditional_split(map, unreliable, 3);
  CHECK(map.size() == before);
}

TEST_CASE("skybox primitives sit on the hemisphere and stay out of the window") {
  GaussianMap map;
  map.init_skybox(1000, 40.0, 99);
  CHECK(map.size() == 1000);
  for (size_t i = 0; i < map.size(); ++i) {
    CHECK(map.primitive(i).mean.norm() == doctest::Approx(40.0).epsilon(1e-9));
    CHECK(map.meta(i).sky);
    CHECK_FALSE(map.primitive(i).reliable);
  }
  CHECK(map.submap_indices().empty());
}

TEST_CASE("tracking association queries never return skybox primitives") {
  GaussianMap map;
  map.init_skybox(500, 40.0, 99);
  map.add(at(Vec3(1, 0, 0)), {0, 0, false});
  map.bump_event();
  const auto& sub = map.submap_indices();
  REQUIRE(sub.size() == 1);
  CHECK_FALSE(map.meta(sub[0]).sky);
  const int nn = map.submap_tree().nearest(Vec3(30, 0, 20));  // nearest overall is sky
  CHECK(nn == 0);  // but only the surface primitive is indexed
}

TEST_CASE("100k skybox does not degrade window query time") {
  GaussianMap map;
  // surface submap
  std::mt19937 rng(53);
  for (int i = 0; i < 2000; ++i) map.add(at(random_vec(rng, -2.0, 2.0)), {0, 0, false});
  map.bump_event();
  map.submap_indices();  // warm

  const auto query_time = [&] {
    const auto start = std::chrono::steady_clock::now();
    double sink = 0;
    for (int q = 0; q < 20000; ++q) {
      const Vec3 x = random_vec(rng, -2.0, 2.0);
      sink += map.submap_tree().nearest(x);
    }
    (void)sink;
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  };
  const double before = query_time();

  map.init_skybox(100000, 60.0, 1);
  map.submap_indices();
  const double after = query_time();
  // sub-linear: 50x more primitives must not slow window queries materially
  CHECK(after < 5.0 * before + 0.05);
}

TEST_CASE("prune removes only optimized low-opacity primitives") {
  GaussianMap map;
  for (int i = 0; i < 5; ++i) map.add(at(Vec3(i, 0, 0), 0.9), {0, 1, false});
  map.bump_event();
  CHECK(map.prune(0.05, 10) == 0);

  GaussianPrimitive dim = at(Vec3(9, 0, 0), 0.01);
  map.add(dim, {-2, 1, false});  // outside the window, optimized once
  CHECK(map.prune(0.05, 10) == 1);
  CHECK(map.size() == 5);

  // not yet optimized: kept
  map.add(dim, {-2, 0, false});
  CHECK(map.prune(0.05, 10) == 0);
}

TEST_CASE("prune protects in-window primitives with above-median weight") {
  GaussianMap map;
  // a tight reliable cluster: high weight
  for (int i = 0; i < 8; ++i) {
    GaussianPrimitive g = at(Vec3(0.02 * i, 0, 0), 0.9);
    g.log_scales = Vec3(std::log(0.05), std::log(0.05), std::log(0.01));
    map.add(g, {0, 1, false});
  }
  // the protected one: low opacity but embedded in the cluster
  GaussianPrimitive weak = at(Vec3(0.07, 0.01, 0), 0.04);
  weak.log_scales = Vec3(std::log(0.05), std::log(0.05), std::log(0.01));
  const int weak_idx = map.add(weak, {0, 1, false});
  // low-weight faraway primitives drag the median down
  for (int i = 0; i < 12; ++i)
    map.add(at(Vec3(10 + i * 3.0, 0, 0), 0.06), {0, 1, false});
  map.bump_event();

  (void)weak_idx;
  const size_t before = map.size();
  map.prune(0.05, 10);
  bool weak_survives = false;
  for (size_t i = 0; i < map.size(); ++i)
    if ((map.primitive(i).mean - Vec3(0.07, 0.01, 0)).norm() < 1e-12) weak_survives = true;
  CHECK(weak_survives);
  CHECK(map.size() <= before);
}

TEST_CASE("map operations keep every primitive valid") {
  std::mt19937 rng(59);
  GaussianMap map;
  for (int i = 0; i < 200; ++i) map.add(random_primitive(rng));
  map.bump_event();
  map.init_skybox(100, 30.0, 4);
  std::vector<int> unreliable;
  for (int i = 0; i < 20; ++i) {
    GaussianPrimitive g = random_primitive(rng);
    g.reliable = false;
    unreliable.push_back(map.add(g));
  }
  conditional_split(map, unreliable, 2);
  map.prune(0.05, 10);
  for (size_t i = 0; i < map.size(); ++i) {
    const GaussianPrimitive& g = map.primitive(i);
    CHECK(g.scales().minCoeff() > 0.0);
    CHECK(std::abs(g.rotation.norm() - 1.0) < 1e-9);
    CHECK(g.normal().norm() == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(g.opacity > 0.0);
    CHECK(g.opacity <= 1.0);
  }
}
