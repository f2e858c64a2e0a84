#pragma once

#include <string>

#include "gslam/ingest/frame.hpp"

namespace gslam::io {

/// Binary P6 PPM, 8 bits per channel.
void write_ppm(const std::string& path, const Image& img);
Image read_ppm(const std::string& path);

/// Grayscale PFM (little-endian float32), for depth dumps.
void write_pfm(const std::string& path, const Grid& grid);
Grid read_pfm(const std::string& path);

}  // namespace gslam::io
