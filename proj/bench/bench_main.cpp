// Timing comparison of the OpenMP kernels against their serial reference
// implementations, plus the agreement between the two routes.
// Usage: gslam_bench [threads] [scale]

#include <chrono>
#include <cstdio>
#include <random>
#include <vector>

#include "gslam/core/parallel.hpp"
#include "gslam/ingest/normal_estimation.hpp"
#include "gslam/map/gaussian_map.hpp"
#include "gslam/map/kdtree.hpp"
#include "gslam/metrics/image_quality.hpp"
#include "gslam/reference/brute_force.hpp"
#include "gslam/reference/naive_renderer.hpp"
#include "gslam/reference/ssim_naive.hpp"
#include "gslam/render/renderer.hpp"

using namespace gslam;

namespace {

double now() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double time_best_of(int reps, const F& fn) {
  double best = 1e30;
  for (int i = 0; i < reps; ++i) {
    const double t0 = now();
    fn();
    best = std::min(best, now() - t0);
  }
  return best;
}

void report(const char* name, double kernel_s, double reference_s, double deviation) {
  std::printf("%-28s %10.4f ms %12.4f ms %8.2fx   max dev %.3e\n", name, kernel_s * 1e3,
              reference_s * 1e3, reference_s / kernel_s, deviation);
}

}  // namespace

int main(int argc, char** argv) {
  const int threads = argc > 1 ? std::atoi(argv[1]) : 2;
  const double scale = argc > 2 ? std::atof(argv[2]) : 1.0;
  set_thread_count(threads);
  std::printf("threads = %d, scale = %.2f\n", threads, scale);
  std::printf("%-28s %13s %15s %9s\n", "kernel", "parallel", "serial ref", "speedup");

  std::mt19937 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const auto rv = [&](double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return Vec3(d(rng), d(rng), d(rng));
  };

  // --- renderer: tile/OMP vs naive per-pixel serial --------------------
  {
    CameraModel cam;
    cam.width = static_cast<int>(320 * scale);
    cam.height = static_cast<int>(240 * scale);
    cam.fx = cam.fy = cam.width / 1.4;
    cam.cx = cam.width / 2.0;
    cam.cy = cam.height / 2.0;
    std::vector<GaussianPrimitive> prims;
    std::normal_distribution<double> n(0, 1);
    for (int i = 0; i < static_cast<int>(3000 * scale); ++i) {
      GaussianPrimitive g;
      g.mean = Vec3(u(rng) * 2.0, u(rng) * 1.5, 2.5 + 2.0 * std::abs(u(rng)));
      Quat q(n(rng), n(rng), n(rng), n(rng));
      g.rotation = q.normalized();
      g.log_scales = rv(std::log(0.01), std::log(0.08));
      g.opacity = 0.2 + 0.7 * std::abs(u(rng));
      g.color = Vec3(0.5, 0.5, 0.5) + 0.5 * rv(-1, 1);
      prims.push_back(g);
    }
    RenderBuffer tiled, naive;
    const double t_k = time_best_of(3, [&] { tiled = render(prims, PoseSE3(), cam); });
    const double t_r =
        time_best_of(1, [&] { naive = reference::naive_render(prims, PoseSE3(), cam); });
    double dev = 0;
    for (size_t i = 0; i < tiled.color.px.size(); ++i)
      dev = std::max(dev, (tiled.color.px[i] - naive.color.px[i]).cwiseAbs().maxCoeff());
    report("render (tile vs naive)", t_k, t_r, dev);
  }

  // --- nearest neighbor: kd-tree vs linear scan ------------------------
  {
    std::vector<Vec3> pts(static_cast<size_t>(50000 * scale));
    for (Vec3& p : pts) p = rv(-10, 10);
    KdTree3 tree(pts);
    std::vector<Vec3> queries(5000);
    for (Vec3& q : queries) q = rv(-10, 10);

    std::vector<int> got(queries.size()), want(queries.size());
    const double t_k = time_best_of(3, [&] {
      parallel_for(static_cast<std::ptrdiff_t>(queries.size()),
                   [&](std::ptrdiff_t i) { got[i] = tree.nearest(queries[i]); });
    });
    const double t_r = time_best_of(1, [&] {
      for (size_t i = 0; i < queries.size(); ++i)
        want[i] = reference::brute_nearest(pts, queries[i]);
    });
    double dev = 0;
    for (size_t i = 0; i < queries.size(); ++i)
      if (got[i] != want[i]) dev += 1;
    report("nearest neighbor", t_k, t_r, dev);
  }

  // --- normal estimation: OMP per point vs single thread ---------------
  {
    PointCloud cloud;
    for (int i = 0; i < static_cast<int>(20000 * scale); ++i) {
      const Vec3 p = rv(-3, 3);
      cloud.points.emplace_back(p.x(), p.y(), 0.1 * std::sin(p.x() * 2.0));
    }
    PointCloud par = cloud, ser = cloud;
    const double t_k =
        time_best_of(2, [&] { estimate_normals(par, 10, Vec3(0, 0, 10)); });
    set_thread_count(1);
    const double t_r =
        time_best_of(2, [&] { estimate_normals(ser, 10, Vec3(0, 0, 10)); });
    set_thread_count(threads);
    double dev = 0;
    for (size_t i = 0; i < cloud.size(); ++i)
      dev = std::max(dev, (par.normals[i] - ser.normals[i]).norm());
    report("normal estimation", t_k, t_r, dev);
  }

  // --- density: map query vs dense brute force --------------------------
  {
    GaussianMap map;
    std::vector<GaussianPrimitive> prims;
    std::normal_distribution<double> n(0, 1);
    for (int i = 0; i < static_cast<int>(2000 * scale); ++i) {
      GaussianPrimitive g;
      g.mean = rv(-5, 5);
      Quat q(n(rng), n(rng), n(rng), n(rng));
      g.rotation = q.normalized();
      g.log_scales = rv(std::log(0.05), std::log(0.5));
      g.opacity = 0.5;
      prims.push_back(g);
      map.add(g);
    }
    std::vector<Vec3> queries(200);
    for (Vec3& q : queries) q = rv(-5, 5);
    std::vector<double> got(queries.size()), want(queries.size());
    const double t_k = time_best_of(3, [&] {
      parallel_for(static_cast<std::ptrdiff_t>(queries.size()), [&](std::ptrdiff_t i) {
        got[i] = map.density({queries[i], 2.0}, DensityMode::exact);
      });
    });
    const double t_r = time_best_of(1, [&] {
      for (size_t i = 0; i < queries.size(); ++i)
        want[i] = reference::brute_density(prims, queries[i], 2.0);
    });
    double dev = 0;
    for (size_t i = 0; i < queries.size(); ++i) dev = std::max(dev, std::abs(got[i] - want[i]));
    report("density query", t_k, t_r, dev);
  }

  // --- ssim: separable/OMP vs direct window -----------------------------
  {
    const int w = static_cast<int>(640 * scale), h = static_cast<int>(480 * scale);
    Image a(w, h), b(w, h);
    std::uniform_real_distribution<double> c(0, 1);
    for (auto& px : a.px) px = Vec3(c(rng), c(rng), c(rng));
    for (size_t i = 0; i < b.px.size(); ++i) b.px[i] = 0.7 * a.px[i] + 0.3 * Vec3(c(rng), c(rng), c(rng));
    double fast = 0, naive = 0;
    const double t_k = time_best_of(2, [&] { fast = metrics::ssim(a, b); });
    const double t_r = time_best_of(1, [&] { naive = reference::ssim_naive(a, b); });
    report("ssim", t_k, t_r, std::abs(fast - naive));
  }

  return 0;
}
