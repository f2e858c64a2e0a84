#include "gslam/render/renderer.hpp"

#include <algorithm>
#include <cmath>

#include "gslam/core/parallel.hpp"

namespace gslam {

using namespace render_detail;

namespace {

struct Splat {
  int prim = 0;
  double u = 0, v = 0;      // projected center, pixel units
  double depth = 0;         // camera-frame z of the mean
  double inv_a = 0, inv_b = 0, inv_c = 0;  // inverse 2D covariance
  double cov_a = 0, cov_b = 0, cov_c = 0;  // 2D covariance
  Vec3 mu_cam = Vec3::Zero();
  int x0 = 0, x1 = 0, y0 = 0, y1 = 0;  // inclusive pixel bounds
};

struct Prepared {
  std::vector<Splat> splats;                  // sorted by (depth, prim)
  std::vector<std::vector<int>> tile_lists;   // splat positions per tile, sorted
  int tiles_x = 0, tiles_y = 0;
  Mat3 R_cw;
  Vec3 t_cw;
};

Prepared prepare(const std::vector<GaussianPrimitive>& prims, const PoseSE3& cam_pose,
                 const CameraModel& cam) {
  Prepared prep;
  const PoseSE3 world_to_cam = cam_pose.inverse();
  prep.R_cw = world_to_cam.rotation_matrix();
  prep.t_cw = world_to_cam.translation();
  prep.tiles_x = (cam.width + kTileSize - 1) / kTileSize;
  prep.tiles_y = (cam.height + kTileSize - 1) / kTileSize;

  const size_t n = prims.size();
  std::vector<Splat> candidates(n);
  std::vector<uint8_t> keep(n, 0);

  parallel_for(static_cast<std::ptrdiff_t>(n), [&](std::ptrdiff_t i) {
    const GaussianPrimitive& g = prims[i];
    const Vec3 mu_c = prep.R_cw * g.mean + prep.t_cw;
    if (mu_c.z() <= kZNear) return;
    const double z = mu_c.z();
    const double u = cam.fx * mu_c.x() / z + cam.cx;
    const double v = cam.fy * mu_c.y() / z + cam.cy;

    const Mat3 sigma_c = prep.R_cw * covariance_of(g) * prep.R_cw.transpose();
    Eigen::Matrix<double, 2, 3> J;
    J << cam.fx / z, 0, -cam.fx * mu_c.x() / (z * z),
        0, cam.fy / z, -cam.fy * mu_c.y() / (z * z);
    const Mat2 cov2 = J * sigma_c * J.transpose();
    const double a = cov2(0, 0), b = 0.5 * (cov2(0, 1) + cov2(1, 0)), c = cov2(1, 1);
    const double det = a * c - b * b;
    if (!(det > 0.0) || a <= 0.0 || c <= 0.0) return;

    const double mid = 0.5 * (a + c);
    const double lam_max = mid + std::sqrt(std::max(0.0, mid * mid - det));
    const double radius = 3.0 * std::sqrt(lam_max) + kFootprintDilation;

    Splat s;
    s.prim = static_cast<int>(i);
    s.u = u;
    s.v = v;
    s.depth = z;
    s.inv_a = c / det;
    s.inv_b = -b / det;
    s.inv_c = a / det;
    s.cov_a = a;
    s.cov_b = b;
    s.cov_c = c;
    s.mu_cam = mu_c;
    s.x0 = std::max(0, static_cast<int>(std::floor(u - radius)));
    s.x1 = std::min(cam.width - 1, static_cast<int>(std::ceil(u + radius)));
    s.y0 = std::max(0, static_cast<int>(std::floor(v - radius)));
    s.y1 = std::min(cam.height - 1, static_cast<int>(std::ceil(v + radius)));
    if (s.x0 > s.x1 || s.y0 > s.y1) return;
    candidates[i] = s;
    keep[i] = 1;
  });

  for (size_t i = 0; i < n; ++i)
    if (keep[i]) prep.splats.push_back(candidates[i]);

  std::sort(prep.splats.begin(), prep.splats.end(), [](const Splat& a, const Splat& b) {
    return a.depth < b.depth || (a.depth == b.depth && a.prim < b.prim);
  });

  prep.tile_lists.assign(static_cast<size_t>(prep.tiles_x) * prep.tiles_y, {});
  for (size_t pos = 0; pos < prep.splats.size(); ++pos) {
    const Splat& s = prep.splats[pos];
    const int tx0 = s.x0 / kTileSize, tx1 = s.x1 / kTileSize;
    const int ty0 = s.y0 / kTileSize, ty1 = s.y1 / kTileSize;
    for (int ty = ty0; ty <= ty1; ++ty)
      for (int tx = tx0; tx <= tx1; ++tx)
        prep.tile_lists[static_cast<size_t>(ty) * prep.tiles_x + tx].push_back(
            static_cast<int>(pos));
  }
  return prep;
}

}  // namespace

RenderBuffer render(const std::vector<GaussianPrimitive>& prims, const PoseSE3& cam_pose,
                    const CameraModel& cam) {
  RenderBuffer buf;
  buf.color = Image(cam.width, cam.height);
  buf.depth = Grid(cam.width, cam.height);
  buf.alpha_accum = Grid(cam.width, cam.height);
  if (prims.empty()) return buf;

  const Prepared prep = prepare(prims, cam_pose, cam);
  const int n_tiles = prep.tiles_x * prep.tiles_y;

  parallel_for(n_tiles, [&](std::ptrdiff_t tile) {
    const auto& list = prep.tile_lists[tile];
    if (list.empty()) return;
    const int tx = static_cast<int>(tile) % prep.tiles_x;
    const int ty = static_cast<int>(tile) / prep.tiles_x;
    const int px0 = tx * kTileSize, px1 = std::min(cam.width, px0 + kTileSize);
    const int py0 = ty * kTileSize, py1 = std::min(cam.height, py0 + kTileSize);

    for (int py = py0; py < py1; ++py) {
      for (int px = px0; px < px1; ++px) {
        double transmittance = 1.0;
        Vec3 color = Vec3::Zero();
        double depth = 0.0, alpha_accum = 0.0;
        for (int pos : list) {
          if (transmittance < kMinTransmittance) break;
          const Splat& s = prep.splats[pos];
          if (px < s.x0 || px > s.x1 || py < s.y0 || py > s.y1) continue;
          const double dx = px - s.u, dy = py - s.v;
          const double m2 = s.inv_a * dx * dx + 2.0 * s.inv_b * dx * dy + s.inv_c * dy * dy;
          if (m2 > kMahalanobisCutoff) continue;
          const GaussianPrimitive& g = prims[s.prim];
          const double a = g.opacity * falloff(m2);
          const double w = a * transmittance;
          color += g.color * w;
          depth += s.depth * w;
          alpha_accum += w;
          transmittance *= 1.0 - a;
        }
        buf.color.at(px, py) = color;
        buf.depth.at(px, py) = depth;
        buf.alpha_accum.at(px, py) = alpha_accum;
      }
    }
  });
  return buf;
}

namespace {

// Per-(tile, splat) accumulators in 2D splat space.
struct SplatGrad2D {
  double du = 0, dv = 0;
  double dinv_a = 0, dinv_b = 0, dinv_c = 0;
  double dd = 0;       // camera-frame depth
  double dalpha = 0;
  Vec3 dcolor = Vec3::Zero();
};

struct Contribution {
  int pos;    // index into prep.splats
  double a;   // opacity x falloff
  double t;   // transmittance at entry
  double m2, dx, dy;
};

}  // namespace

RenderGradients render_with_gradients(const std::vector<GaussianPrimitive>& prims,
                                      const PoseSE3& cam_pose, const CameraModel& cam,
                                      const Image& upstream_color, const Grid& upstream_depth,
                                      RenderBuffer* forward) {
  RenderGradients grads;
  grads.resize(prims.size());
  if (forward) {
    forward->color = Image(cam.width, cam.height);
    forward->depth = Grid(cam.width, cam.height);
    forward->alpha_accum = Grid(cam.width, cam.height);
  }
  if (prims.empty()) return grads;

  const Prepared prep = prepare(prims, cam_pose, cam);
  const int n_tiles = prep.tiles_x * prep.tiles_y;
  const size_t n_splats = prep.splats.size();

  // Tile-local 2D gradients, keyed by position in the tile list so the
  // cross-tile reduction below is order-independent of the schedule.
  std::vector<std::vector<SplatGrad2D>> tile_grads(n_tiles);

  parallel_for(n_tiles, [&](std::ptrdiff_t tile) {
    const auto& list = prep.tile_lists[tile];
    if (list.empty()) return;
    tile_grads[tile].assign(list.size(), SplatGrad2D{});
    auto& local = tile_grads[tile];

    const int tx = static_cast<int>(tile) % prep.tiles_x;
    const int ty = static_cast<int>(tile) / prep.tiles_x;
    const int px0 = tx * kTileSize, px1 = std::min(cam.width, px0 + kTileSize);
    const int py0 = ty * kTileSize, py1 = std::min(cam.height, py0 + kTileSize);

    std::vector<Contribution> contribs;
    std::vector<int> list_slot(list.size());

    for (int py = py0; py < py1; ++py) {
      for (int px = px0; px < px1; ++px) {
        contribs.clear();
        double transmittance = 1.0;
        Vec3 color = Vec3::Zero();
        double depth = 0.0, alpha_accum = 0.0;
        for (size_t li = 0; li < list.size(); ++li) {
          if (transmittance < kMinTransmittance) break;
          const Splat& s = prep.splats[list[li]];
          if (px < s.x0 || px > s.x1 || py < s.y0 || py > s.y1) continue;
          const double dx = px - s.u, dy = py - s.v;
          const double m2 = s.inv_a * dx * dx + 2.0 * s.inv_b * dx * dy + s.inv_c * dy * dy;
          if (m2 > kMahalanobisCutoff) continue;
          const GaussianPrimitive& g = prims[s.prim];
          const double a = g.opacity * falloff(m2);
          contribs.push_back({static_cast<int>(li), a, transmittance, m2, dx, dy});
          const double w = a * transmittance;
          color += g.color * w;
          depth += s.depth * w;
          alpha_accum += w;
          transmittance *= 1.0 - a;
        }
        if (forward) {
          forward->color.at(px, py) = color;
          forward->depth.at(px, py) = depth;
          forward->alpha_accum.at(px, py) = alpha_accum;
        }

        const Vec3 gC = upstream_color.at(px, py);
        const double gD = upstream_depth.at(px, py);
        if (gC.isZero(0.0) && gD == 0.0) continue;

        // Walk contributions back to front; `suffix` holds
        // sum_{j>i} a_j T_j (c_j . gC + d_j gD).
        double suffix = 0.0;
        for (int ci = static_cast<int>(contribs.size()) - 1; ci >= 0; --ci) {
          const Contribution& cb = contribs[ci];
          const Splat& s = prep.splats[list[cb.pos]];
          const GaussianPrimitive& g = prims[s.prim];
          const double pixel_gain = g.color.dot(gC) + s.depth * gD;

          SplatGrad2D& acc = local[cb.pos];
          const double w = cb.a * cb.t;
          acc.dcolor += w * gC;
          acc.dd += w * gD;

          double da = cb.t * pixel_gain;
          if (1.0 - cb.a > 1e-12) da -= suffix / (1.0 - cb.a);
          suffix += w * pixel_gain;

          acc.dalpha += da * falloff(cb.m2);
          const double dm2 = da * g.opacity * falloff_dm2(cb.m2);
          const double ddx = (2.0 * s.inv_a * cb.dx + 2.0 * s.inv_b * cb.dy) * dm2;
          const double ddy = (2.0 * s.inv_b * cb.dx + 2.0 * s.inv_c * cb.dy) * dm2;
          acc.du -= ddx;
          acc.dv -= ddy;
          acc.dinv_a += cb.dx * cb.dx * dm2;
          acc.dinv_b += 2.0 * cb.dx * cb.dy * dm2;
          acc.dinv_c += cb.dy * cb.dy * dm2;
        }
      }
    }
  });

  // Deterministic reduction: tiles in index order into per-splat accumulators.
  std::vector<SplatGrad2D> splat_grads(n_splats);
  for (int tile = 0; tile < n_tiles; ++tile) {
    const auto& list = prep.tile_lists[tile];
    const auto& local = tile_grads[tile];
    for (size_t li = 0; li < local.size(); ++li) {
      SplatGrad2D& dst = splat_grads[list[li]];
      const SplatGrad2D& src = local[li];
      dst.du += src.du;
      dst.dv += src.dv;
      dst.dinv_a += src.dinv_a;
      dst.dinv_b += src.dinv_b;
      dst.dinv_c += src.dinv_c;
      dst.dd += src.dd;
      dst.dalpha += src.dalpha;
      dst.dcolor += src.dcolor;
    }
  }

  // 2D splat gradients -> 3D parameter gradients, then the pose reduction.
  std::vector<Vec6> pose_contrib(n_splats, Vec6::Zero());

  parallel_for(static_cast<std::ptrdiff_t>(n_splats), [&](std::ptrdiff_t sp) {
    const Splat& s = prep.splats[sp];
    const SplatGrad2D& g2 = splat_grads[sp];
    const GaussianPrimitive& g = prims[s.prim];

    grads.d_color[s.prim] += g2.dcolor;
    grads.d_opacity[s.prim] += g2.dalpha;

    // d(inverse cov) -> d(cov)
    Mat2 g_inv;
    g_inv << g2.dinv_a, 0.5 * g2.dinv_b, 0.5 * g2.dinv_b, g2.dinv_c;
    Mat2 inv;
    inv << s.inv_a, s.inv_b, s.inv_b, s.inv_c;
    const Mat2 g_cov2 = -inv * g_inv * inv;

    // cov2 = J sigma_c J^T
    const double z = s.mu_cam.z(), x = s.mu_cam.x(), y = s.mu_cam.y();
    Eigen::Matrix<double, 2, 3> J;
    J << cam.fx / z, 0, -cam.fx * x / (z * z), 0, cam.fy / z, -cam.fy * y / (z * z);
    const Mat3 sigma_c = prep.R_cw * covariance_of(g) * prep.R_cw.transpose();

    const Mat3 g_sigma_c = J.transpose() * g_cov2 * J;
    const Eigen::Matrix<double, 2, 3> g_J = 2.0 * g_cov2 * J * sigma_c;

    // J and the center projection both depend on mu_cam.
    Vec3 g_mu_cam = Vec3::Zero();
    g_mu_cam.x() += g_J(0, 2) * (-cam.fx / (z * z));
    g_mu_cam.y() += g_J(1, 2) * (-cam.fy / (z * z));
    g_mu_cam.z() += g_J(0, 0) * (-cam.fx / (z * z)) + g_J(1, 1) * (-cam.fy / (z * z)) +
                    g_J(0, 2) * (2.0 * cam.fx * x / (z * z * z)) +
                    g_J(1, 2) * (2.0 * cam.fy * y / (z * z * z));
    g_mu_cam += Vec3(g2.du * cam.fx / z, g2.dv * cam.fy / z,
                     -g2.du * cam.fx * x / (z * z) - g2.dv * cam.fy * y / (z * z));
    g_mu_cam.z() += g2.dd;

    grads.d_mean[s.prim] += prep.R_cw.transpose() * g_mu_cam;

    // World covariance chain: sigma_w = M M^T, M = R(q) diag(exp(log_scales)).
    const Mat3 g_sigma_w = prep.R_cw.transpose() * g_sigma_c * prep.R_cw;
    const Quat q_hat = g.rotation.normalized();
    const Mat3 R = q_hat.toRotationMatrix();
    const Vec3 scale = g.scales();
    const Mat3 M = R * scale.asDiagonal();
    const Mat3 g_M = 2.0 * g_sigma_w * M;

    const Mat3 RtgM = R.transpose() * g_M;
    for (int k = 0; k < 3; ++k)
      grads.d_log_scales[s.prim][k] += RtgM(k, k) * scale[k];

    const Mat3 g_R = g_M * scale.asDiagonal();
    // dR/dq for q = (x, y, z, w), then project onto the unit-quaternion tangent.
    const double qw = q_hat.w(), qx = q_hat.x(), qy = q_hat.y(), qz = q_hat.z();
    Mat3 dR[4];
    dR[0] << 0, 2 * qy, 2 * qz, 2 * qy, -4 * qx, -2 * qw, 2 * qz, 2 * qw, -4 * qx;  // d/dx
    dR[1] << -4 * qy, 2 * qx, 2 * qw, 2 * qx, 0, 2 * qz, -2 * qw, 2 * qz, -4 * qy;  // d/dy
    dR[2] << -4 * qz, -2 * qw, 2 * qx, 2 * qw, -4 * qz, 2 * qy, 2 * qx, 2 * qy, 0;  // d/dz
    dR[3] << 0, -2 * qz, 2 * qy, 2 * qz, 0, -2 * qx, -2 * qy, 2 * qx, 0;            // d/dw
    Vec4 g_q;
    for (int k = 0; k < 4; ++k) g_q[k] = (g_R.array() * dR[k].array()).sum();
    Vec4 q_coeffs(qx, qy, qz, qw);
    g_q -= q_coeffs * q_coeffs.dot(g_q);  // renormalization Jacobian at |q| = 1
    grads.d_rotation[s.prim] += g_q;

    // Pose: left perturbation of world-to-camera.
    Vec6 p;
    p.head<3>() = g_mu_cam;
    p.tail<3>() = s.mu_cam.cross(g_mu_cam);
    const Mat3 B = sigma_c * g_sigma_c;
    p.tail<3>() += 2.0 * Vec3(B(1, 2) - B(2, 1), B(2, 0) - B(0, 2), B(0, 1) - B(1, 0));
    pose_contrib[sp] = p;
  });

  for (const Vec6& p : pose_contrib) grads.d_pose += p;
  return grads;
}

}  // namespace gslam
