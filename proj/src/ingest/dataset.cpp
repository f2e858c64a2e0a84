#include "gslam/ingest/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "gslam/core/errors.hpp"
#include "gslam/ingest/depth_projection.hpp"
#include "gslam/io/image_io.hpp"
#include "gslam/io/text_formats.hpp"

namespace fs = std::filesystem;

namespace gslam {

namespace {

struct Stamped {
  double t;
  std::string path;
};

std::vector<Stamped> list_stamped(const fs::path& dir, const std::string& ext) {
  std::vector<Stamped> out;
  if (!fs::is_directory(dir)) return out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ext) continue;
    try {
      out.push_back({std::stod(entry.path().stem().string()), entry.path().string()});
    } catch (const std::exception&) {
      // non-timestamp files are ignored
    }
  }
  std::sort(out.begin(), out.end(), [](const Stamped& a, const Stamped& b) { return a.t < b.t; });
  return out;
}

}  // namespace

Sequence load_sequence(const std::string& dir, const SequenceOptions& opts) {
  Sequence seq;
  const auto images = list_stamped(fs::path(dir) / "images", ".ppm");
  const auto scans = list_stamped(fs::path(dir) / "scans", ".xyz");
  if (images.empty() && scans.empty()) return seq;

  const std::string calib_path = (fs::path(dir) / "calib.txt").string();
  if (!fs::exists(calib_path)) throw MissingCalibration(calib_path);
  seq.cam = io::read_calib(calib_path);

  std::vector<bool> scan_used(scans.size(), false);
  int index = 0;
  for (const auto& img : images) {
    // nearest unused scan by timestamp
    int best = -1;
    double best_dt = opts.pair_tolerance;
    for (size_t s = 0; s < scans.size(); ++s) {
      if (scan_used[s]) continue;
      const double dt = std::abs(scans[s].t - img.t);
      if (dt <= best_dt) {
        best_dt = dt;
        best = static_cast<int>(s);
      }
    }
    if (best < 0) {
      ++seq.skipped;
      continue;
    }
    scan_used[best] = true;

    Frame frame;
    frame.index = index++;
    frame.timestamp = img.t;
    frame.image = io::read_ppm(img.path);
    frame.cloud = io::read_xyz(scans[best].path);
    frame.cloud.timestamp = scans[best].t;
    if (seq.cam.width == 0) {
      seq.cam.width = frame.image.width;
      seq.cam.height = frame.image.height;
    }
    frame.depth = project_to_depth(frame.cloud, seq.cam);
    seq.frames.push_back(std::move(frame));
  }
  for (bool used : scan_used)
    if (!used) ++seq.skipped;
  return seq;
}

}  // namespace gslam
