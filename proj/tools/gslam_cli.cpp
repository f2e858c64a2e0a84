#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "gslam/core/errors.hpp"
#include "gslam/core/parallel.hpp"
#include "gslam/ingest/dataset.hpp"
#include "gslam/io/image_io.hpp"
#include "gslam/io/ply.hpp"
#include "gslam/io/run_config.hpp"
#include "gslam/io/text_formats.hpp"
#include "gslam/metrics/image_quality.hpp"
#include "gslam/metrics/trajectory.hpp"
#include "gslam/pipeline/slam_runner.hpp"
#include "gslam/render/renderer.hpp"
#include "gslam/sim/simulate.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitTrackingLost = 3;

// ---------------------------------------------------------------------------
// scene/trajectory spec files: flat "key = value" with '#' comments; values
// may hold several whitespace-separated tokens (vectors).

std::map<std::string, std::string> parse_spec_text(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      std::istringstream probe(line);
      std::string tok;
      if (probe >> tok)
        throw std::invalid_argument("spec line " + std::to_string(line_no) +
                                    ": expected 'key = value', got '" + tok + "'");
      continue;
    }
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::invalid_argument("spec line " + std::to_string(line_no) +
                                  ": empty key or value");
    kv[key] = value;
  }
  return kv;
}

const std::map<std::string, std::string> kBundledSpecs = {
    {"plane-corridor",
     "scene = corridor\nextent = 14\nframes = 50\ntraj = line\n"
     "start = 0 0 0\nend = 0 0 2.5\ndt = 0.1\nrays = 2600\npattern = rosette\n"
     "noise = 0\nwidth = 96\nheight = 72\nhfov_deg = 70\nseed = 7\n"},
    {"checker-wall",
     "scene = plane\nextent = 2\nframes = 12\ntraj = line\n"
     "start = 0 0 0\nend = 0.4 0 0.3\ndt = 0.1\nrays = 1500\npattern = rosette\n"
     "noise = 0\nwidth = 96\nheight = 72\nhfov_deg = 70\nseed = 11\n"},
    {"sphere-garden",
     "scene = spheres\nextent = 8\nframes = 30\ntraj = arc\n"
     "arc_radius = 5\narc_start_deg = 200\narc_span_deg = 60\ndt = 0.1\n"
     "rays = 2600\npattern = rosette\nnoise = 0\nwidth = 96\nheight = 72\n"
     "hfov_deg = 70\nseed = 3\n"},
};

struct SimSetup {
  gslam::sim::SceneSpec scene;
  gslam::sim::TrajectorySpec traj;
  gslam::sim::LidarPattern pattern;
  gslam::CameraModel cam;
};

double num(const std::map<std::string, std::string>& kv, const std::string& key,
           double fallback) {
  const auto it = kv.find(key);
  return it == kv.end() ? fallback : std::stod(it->second);
}

gslam::Vec3 vec(const std::map<std::string, std::string>& kv, const std::string& key,
                const gslam::Vec3& fallback) {
  const auto it = kv.find(key);
  if (it == kv.end()) return fallback;
  std::istringstream ss(it->second);
  gslam::Vec3 v;
  if (!(ss >> v.x() >> v.y() >> v.z()))
    throw std::invalid_argument("spec field '" + key + "': expected three numbers");
  return v;
}

SimSetup build_sim_setup(const std::map<std::string, std::string>& kv) {
  SimSetup s;
  const uint64_t seed = static_cast<uint64_t>(num(kv, "seed", 7));
  const double extent = num(kv, "extent", 12.0);
  const std::string scene = kv.count("scene") ? kv.at("scene") : "corridor";
  if (scene == "corridor")
    s.scene = gslam::sim::corridor_scene(extent, seed);
  else if (scene == "plane")
    s.scene = gslam::sim::plane_scene(extent, seed);
  else if (scene == "spheres")
    s.scene = gslam::sim::sphere_scene(static_cast<int>(num(kv, "spheres", 6)), extent, seed);
  else
    throw std::invalid_argument("spec field 'scene': unknown scene '" + scene + "'");

  s.traj.kind = (kv.count("traj") && kv.at("traj") == "arc")
                    ? gslam::sim::TrajectorySpec::Kind::arc
                    : gslam::sim::TrajectorySpec::Kind::line;
  s.traj.start = vec(kv, "start", gslam::Vec3(0, 0, 0));
  s.traj.end = vec(kv, "end", gslam::Vec3(0, 0, 2));
  s.traj.center = vec(kv, "center", gslam::Vec3(0, 0, 0));
  s.traj.arc_radius = num(kv, "arc_radius", 2.0);
  s.traj.arc_start_deg = num(kv, "arc_start_deg", 0.0);
  s.traj.arc_span_deg = num(kv, "arc_span_deg", 90.0);
  s.traj.frames = static_cast<int>(num(kv, "frames", 20));
  s.traj.dt = num(kv, "dt", 0.1);

  s.pattern.kind = (kv.count("pattern") && kv.at("pattern") == "grid")
                       ? gslam::sim::LidarPattern::Kind::grid
                       : gslam::sim::LidarPattern::Kind::rosette;
  s.pattern.rays = static_cast<int>(num(kv, "rays", 2600));
  s.pattern.noise_sigma = num(kv, "noise", 0.0);
  s.pattern.fov_h_deg = num(kv, "fov_h_deg", 81.0);
  s.pattern.fov_v_deg = num(kv, "fov_v_deg", 25.0);
  s.pattern.seed = seed;

  s.cam.width = static_cast<int>(num(kv, "width", 96));
  s.cam.height = static_cast<int>(num(kv, "height", 72));
  const double hfov = num(kv, "hfov_deg", 70.0) * M_PI / 180.0;
  s.cam.fx = s.cam.width / (2.0 * std::tan(hfov / 2.0));
  s.cam.fy = s.cam.fx;
  s.cam.cx = s.cam.width / 2.0;
  s.cam.cy = s.cam.height / 2.0;
  return s;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const std::string& spec_file, const std::string& out_dir,
                 const std::vector<std::string>& overrides) {
  std::map<std::string, std::string> kv;
  if (kBundledSpecs.count(spec_file)) {
    kv = parse_spec_text(kBundledSpecs.at(spec_file));
  } else {
    std::ifstream in(spec_file);
    if (!in) {
      std::cerr << "error: cannot open spec file: " << spec_file << "\n";
      return kExitBadInput;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    kv = parse_spec_text(ss.str());
  }
  for (const std::string& ov : overrides) {
    const size_t eq = ov.find('=');
    if (eq == std::string::npos) {
      std::cerr << "error: --set expects key=value, got '" << ov << "'\n";
      return kExitBadInput;
    }
    kv[ov.substr(0, eq)] = ov.substr(eq + 1);
  }
  const SimSetup s = build_sim_setup(kv);
  const int frames = gslam::sim::generate_sequence(s.scene, s.traj, s.cam, s.pattern, out_dir);
  std::cout << "wrote " << frames << " frames to " << out_dir << "\n";
  return kExitOk;
}

int cmd_slam(const std::string& dataset_dir, const gslam::io::RunConfig& cfg,
             const std::string& out_dir) {
  gslam::SequenceOptions seq_opts;
  seq_opts.pair_tolerance = cfg.pair_tolerance;
  const gslam::Sequence seq = gslam::load_sequence(dataset_dir, seq_opts);
  if (seq.frames.empty()) {
    std::cerr << "error: no frames in dataset " << dataset_dir << "\n";
    return kExitBadInput;
  }

  const gslam::SlamOutputs out = gslam::run_slam(seq, cfg);

  fs::create_directories(out_dir);
  gslam::io::write_tum((fs::path(out_dir) / "trajectory.txt").string(), out.trajectory);
  gslam::io::write_splat_ply((fs::path(out_dir) / "map.ply").string(), out.map);
  cfg.save((fs::path(out_dir) / "config.txt").string());

  {
    std::ofstream csv((fs::path(out_dir) / "loss.csv").string());
    csv << "batch,round,iter,E_pho,E_geo,E_normal,total\n";
    char line[256];
    for (const gslam::LossLogRow& r : out.loss_log) {
      std::snprintf(line, sizeof(line), "%d,%d,%d,%.9g,%.9g,%.9g,%.9g\n", r.batch, r.round,
                    r.iter, r.e_pho, r.e_geo, r.e_normal, r.total);
      csv << line;
    }
  }

  json summary;
  summary["frames"] = out.frames;
  summary["keyframes"] = out.keyframes;
  summary["primitives"] = out.map.size();
  summary["seconds"] = out.seconds;
  summary["fps"] = out.fps;
  summary["tracking_lost"] = out.tracking_lost;
  std::ofstream((fs::path(out_dir) / "summary.json").string()) << summary.dump(2) << "\n";

  if (out.tracking_lost) {
    std::cerr << "tracking lost after " << out.frames << " frames; partial outputs in "
              << out_dir << "\n";
    return kExitTrackingLost;
  }
  std::cout << "slam ok: " << out.frames << " frames, " << out.keyframes << " keyframes, "
            << out.map.size() << " primitives, " << out.fps << " fps\n";
  return kExitOk;
}

int cmd_render(const std::string& ply_path, const std::string& pose_file,
               const std::string& calib_path, int width, int height,
               const std::string& out_dir) {
  gslam::GaussianMap map = gslam::io::read_splat_ply(ply_path);
  gslam::CameraModel cam = gslam::io::read_calib(calib_path);
  cam.width = width;
  cam.height = height;
  const auto poses = gslam::io::read_tum(pose_file);
  fs::create_directories(out_dir);
  char name[64];
  for (const gslam::io::TimedPose& tp : poses) {
    const gslam::RenderBuffer buf = gslam::render(map.primitives(), tp.pose, cam);
    std::snprintf(name, sizeof(name), "%.6f", tp.timestamp);
    gslam::io::write_ppm((fs::path(out_dir) / (std::string(name) + ".ppm")).string(),
                         buf.color);
    gslam::io::write_pfm((fs::path(out_dir) / (std::string(name) + ".pfm")).string(),
                         buf.depth);
  }
  std::cout << "rendered " << poses.size() << " views to " << out_dir << "\n";
  return kExitOk;
}

int cmd_eval_traj(const std::string& est_path, const std::string& gt_path,
                  const std::string& report_path) {
  const auto est = gslam::io::read_tum(est_path);
  const auto gt = gslam::io::read_tum(gt_path);
  const auto m = gslam::metrics::evaluate_trajectory(est, gt);
  json row;
  row["kind"] = "trajectory";
  row["ate_rmse"] = m.ate_rmse;
  row["t_rel"] = m.t_rel;
  row["r_rel"] = m.r_rel;
  if (!report_path.empty()) {
    std::ofstream out(report_path, std::ios::app);
    out << row.dump() << "\n";
  }
  std::cout << row.dump() << "\n";
  return kExitOk;
}

int cmd_eval_images(const std::string& rendered_dir, const std::string& target_dir,
                    const std::string& report_path) {
  auto list_ppm = [](const std::string& dir) {
    std::vector<std::string> names;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".ppm") names.push_back(e.path().filename().string());
    std::sort(names.begin(), names.end());
    return names;
  };
  const auto rendered = list_ppm(rendered_dir);
  const auto target = list_ppm(target_dir);
  if (rendered.size() != target.size()) {
    std::cerr << "error: image count mismatch between " << rendered_dir << " ("
              << rendered.size() << ") and " << target_dir << " (" << target.size() << ")\n";
    return kExitBadInput;
  }
  std::ofstream report;
  if (!report_path.empty()) report.open(report_path, std::ios::app);
  double mean_ssim = 0, mean_psnr = 0, mean_comp = 0;
  for (size_t i = 0; i < rendered.size(); ++i) {
    const gslam::Image a = gslam::io::read_ppm((fs::path(rendered_dir) / rendered[i]).string());
    const gslam::Image b = gslam::io::read_ppm((fs::path(target_dir) / target[i]).string());
    const auto m = gslam::metrics::image_metrics(a, b);
    json row;
    row["kind"] = "image";
    row["name"] = rendered[i];
    row["ssim"] = m.ssim;
    row["psnr"] = m.psnr;
    row["composite"] = m.composite;
    if (report.is_open()) report << row.dump() << "\n";
    std::cout << row.dump() << "\n";
    mean_ssim += m.ssim;
    mean_psnr += m.psnr;
    mean_comp += m.composite;
  }
  if (!rendered.empty()) {
    const double n = static_cast<double>(rendered.size());
    json row;
    row["kind"] = "image_mean";
    row["ssim"] = mean_ssim / n;
    row["psnr"] = mean_psnr / n;
    row["composite"] = mean_comp / n;
    if (report.is_open()) report << row.dump() << "\n";
    std::cout << row.dump() << "\n";
  }
  return kExitOk;
}

std::string config_help_footer() {
  std::ostringstream out;
  out << "Config fields (key = default), settable via --config file or --set key=value:\n";
  for (const auto& f : gslam::io::RunConfig().fields())
    out << "  " << f[0] << " = " << f[2] << "\n";
  return out.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"LiDAR-visual SLAM on a 3D Gaussian map"};
  app.require_subcommand(1);
  app.footer(config_help_footer());

  std::string spec_file, dataset_dir, out_dir = "out";
  std::string ply_path, pose_file, calib_path;
  std::string est_path, gt_path, rendered_dir, target_dir, report_path;
  std::string config_path;
  std::vector<std::string> overrides;
  long seed = -1;
  int threads = -1;
  int width = 96, height = 72;

  CLI::App* sim = app.add_subcommand("simulate", "generate a synthetic dataset");
  sim->add_option("spec", spec_file,
                  "spec file or bundled name (plane-corridor, checker-wall, sphere-garden)")
      ->required();
  sim->add_option("--out", out_dir, "output dataset directory")->required();
  sim->add_option("--set", overrides, "override spec fields, key=value");

  CLI::App* slam = app.add_subcommand("slam", "run the SLAM pipeline on a dataset");
  slam->add_option("dataset", dataset_dir, "dataset directory")->required();
  slam->add_option("--out", out_dir, "output directory");
  slam->add_option("--config", config_path, "run config file (key = value lines)");
  slam->add_option("--set", overrides, "override config fields, key=value");
  slam->add_option("--seed", seed, "override config seed");
  slam->add_option("--threads", threads, "override config threads (1 = deterministic)");

  CLI::App* render = app.add_subcommand("render", "render views from an exported map");
  render->add_option("map", ply_path, "splat PLY file")->required();
  render->add_option("poses", pose_file, "poses to render (timestamp tx ty tz qx qy qz qw)")
      ->required();
  render->add_option("--calib", calib_path, "calib.txt with intrinsics")->required();
  render->add_option("--width", width, "image width");
  render->add_option("--height", height, "image height");
  render->add_option("--out", out_dir, "output directory");
  render->add_option("--threads", threads, "worker threads");

  CLI::App* eval = app.add_subcommand("eval", "evaluate trajectories or image sets");
  eval->add_option("--est", est_path, "estimated trajectory");
  eval->add_option("--gt", gt_path, "ground-truth trajectory");
  eval->add_option("--rendered", rendered_dir, "rendered image directory");
  eval->add_option("--target", target_dir, "target image directory");
  eval->add_option("--out", report_path, "JSON-lines report path");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return cmd_simulate(spec_file, out_dir, overrides);

    if (slam->parsed()) {
      gslam::io::RunConfig cfg;
      if (!config_path.empty()) cfg = gslam::io::RunConfig::load(config_path);
      for (const std::string& ov : overrides) {
        const size_t eq = ov.find('=');
        if (eq == std::string::npos) {
          std::cerr << "error: --set expects key=value, got '" << ov << "'\n";
          return kExitBadInput;
        }
        cfg.set(ov.substr(0, eq), ov.substr(eq + 1));
      }
      if (seed >= 0) cfg.seed = seed;
      if (threads > 0) cfg.threads = threads;
      return cmd_slam(dataset_dir, cfg, out_dir);
    }

    if (render->parsed()) {
      gslam::set_thread_count(threads > 0 ? threads : 1);
      return cmd_render(ply_path, pose_file, calib_path, width, height, out_dir);
    }

    if (eval->parsed()) {
      if (!est_path.empty() && !gt_path.empty())
        return cmd_eval_traj(est_path, gt_path, report_path);
      if (!rendered_dir.empty() && !target_dir.empty())
        return cmd_eval_images(rendered_dir, target_dir, report_path);
      std::cerr << "error: eval needs --est/--gt or --rendered/--target\n";
      return kExitBadInput;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadInput;
  }
  return kExitOk;
}
