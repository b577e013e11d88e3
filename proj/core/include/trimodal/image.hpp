#pragma once

#include <filesystem>

#include "trimodal/clip.hpp"

namespace trimodal {

// Binary PPM (P6, maxval 255). The file stores interleaved RGB; FrameImage
// planes are ordered blue, red, green.
FrameImage read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const FrameImage& frame);

}  // namespace trimodal
