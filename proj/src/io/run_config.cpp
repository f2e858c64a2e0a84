#include "gslam/io/run_config.hpp"

#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "gslam/core/errors.hpp"

namespace gslam::io {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(long v) { return std::to_string(v); }
std::string fmt(bool v) { return v ? "true" : "false"; }

void assign(double& dst, const std::string& s) { dst = std::stod(s); }
void assign(int& dst, const std::string& s) { dst = std::stoi(s); }
void assign(long& dst, const std::string& s) { dst = std::stol(s); }
void assign(bool& dst, const std::string& s) {
  if (s == "true" || s == "1")
    dst = true;
  else if (s == "false" || s == "0")
    dst = false;
  else
    throw std::invalid_argument("bad bool: " + s);
}

template <typename Cfg, typename V>
void visit_fields(Cfg& c, V&& v) {
  v("lambda_r", c.lambda_r);
  v("max_dist", c.max_dist);
  v("track_max_iters", c.track_max_iters);
  v("track_tol", c.track_tol);
  v("min_inliers", c.min_inliers);
  v("huber_factor", c.huber_factor);
  v("normal_k", c.normal_k);
  v("density_fast", c.density_fast);
  v("keyframe_covis", c.keyframe_covis);
  v("window_events", c.window_events);
  v("radius_factor", c.radius_factor);
  v("ray_stretch", c.ray_stretch);
  v("init_opacity", c.init_opacity);
  v("skybox_count", c.skybox_count);
  v("skybox_radius", c.skybox_radius);
  v("opacity_floor", c.opacity_floor);
  v("stale_window", c.stale_window);
  v("lambda1", c.lambda1);
  v("lambda2", c.lambda2);
  v("batch_keyframes", c.batch_keyframes);
  v("pose_iters", c.pose_iters);
  v("map_iters", c.map_iters);
  v("pose_step", c.pose_step);
  v("lr_mean", c.lr_mean);
  v("lr_log_scales", c.lr_log_scales);
  v("lr_rotation", c.lr_rotation);
  v("lr_opacity", c.lr_opacity);
  v("lr_color", c.lr_color);
  v("seed", c.seed);
  v("threads", c.threads);
  v("pair_tolerance", c.pair_tolerance);
}

}  // namespace

std::string RunConfig::serialize() const {
  std::ostringstream out;
  visit_fields(*this, [&](const char* key, const auto& value) {
    out << key << " = " << fmt(value) << "\n";
  });
  return out.str();
}

RunConfig RunConfig::parse(const std::string& text) {
  RunConfig cfg;
  std::map<std::string, std::string> kv;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    std::istringstream ls(line);
    std::string key, eq, value;
    if (!(ls >> key)) continue;  // blank
    if (!(ls >> eq >> value) || eq != "=")
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    kv[key] = value;
  }
  visit_fields(cfg, [&](const char* key, auto& value) {
    const auto it = kv.find(key);
    if (it == kv.end()) return;
    assign(value, it->second);
    kv.erase(it);
  });
  if (!kv.empty())
    throw std::invalid_argument("unknown config key: " + kv.begin()->first);
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UnreadableFile(path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw UnreadableFile(path);
  out << serialize();
}

void RunConfig::set(const std::string& key, const std::string& value) {
  bool found = false;
  visit_fields(*this, [&](const char* k, auto& v) {
    if (key == k) {
      assign(v, value);
      found = true;
    }
  });
  if (!found) throw std::invalid_argument("unknown config key: " + key);
}

std::vector<std::array<std::string, 3>> RunConfig::fields() const {
  std::vector<std::array<std::string, 3>> rows;
  const RunConfig defaults;
  std::vector<std::string> current, def;
  visit_fields(*this, [&](const char* key, const auto& value) {
    rows.push_back({key, fmt(value), ""});
  });
  size_t i = 0;
  visit_fields(defaults, [&](const char*, const auto& value) { rows[i++][2] = fmt(value); });
  return rows;
}

}  // namespace gslam::io
