#include "trimodal/image.hpp"

#include <cmath>
#include <fstream>

#include "trimodal/errors.hpp"

namespace trimodal {

namespace {

// Plane indices inside FrameImage::pixels.
constexpr std::size_t kBlue = 0;
constexpr std::size_t kRed = 1;
constexpr std::size_t kGreen = 2;

int read_ppm_int(std::istream& in) {
  // Skips whitespace and '#' comments between header fields.
  for (;;) {
    int c = in.peek();
    if (c == '#') {
      std::string comment;
      std::getline(in, comment);
    } else if (std::isspace(c)) {
      in.get();
    } else {
      break;
    }
  }
  int value = -1;
  in >> value;
  return value;
}

}  // namespace

FrameImage read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image " + path.string());
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  if (!in || magic != "P6") {
    throw UnsupportedFormatError("image " + path.string() + " is not binary PPM (P6)");
  }
  const int width = read_ppm_int(in);
  const int height = read_ppm_int(in);
  const int maxval = read_ppm_int(in);
  if (!in || width <= 0 || height <= 0) throw ParseError("bad PPM header in " + path.string());
  if (maxval != 255) {
    throw UnsupportedFormatError("PPM maxval must be 255 in " + path.string());
  }
  in.get();  // single whitespace after maxval

  const std::size_t h = static_cast<std::size_t>(height);
  const std::size_t w = static_cast<std::size_t>(width);
  std::vector<unsigned char> raw(3 * h * w);
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
    throw IoError("truncated PPM data in " + path.string());
  }

  FrameImage frame;
  frame.height = h;
  frame.width = w;
  frame.pixels.resize(3 * h * w);
  const std::size_t plane = h * w;
  for (std::size_t i = 0; i < plane; ++i) {
    frame.pixels[kRed * plane + i] = raw[3 * i + 0] / 255.0;
    frame.pixels[kGreen * plane + i] = raw[3 * i + 1] / 255.0;
    frame.pixels[kBlue * plane + i] = raw[3 * i + 2] / 255.0;
  }
  return frame;
}

void write_ppm(const std::filesystem::path& path, const FrameImage& frame) {
  if (frame.pixels.size() != 3 * frame.height * frame.width) {
    throw DimensionError("write_ppm: pixel buffer does not match dimensions");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write image " + path.string());
  out << "P6\n" << frame.width << " " << frame.height << "\n255\n";
  const std::size_t plane = frame.height * frame.width;
  std::vector<unsigned char> raw(3 * plane);
  auto quantize = [](double v) {
    const long q = std::lround(v * 255.0);
    return static_cast<unsigned char>(std::clamp(q, 0L, 255L));
  };
  for (std::size_t i = 0; i < plane; ++i) {
    raw[3 * i + 0] = quantize(frame.pixels[kRed * plane + i]);
    raw[3 * i + 1] = quantize(frame.pixels[kGreen * plane + i]);
    raw[3 * i + 2] = quantize(frame.pixels[kBlue * plane + i]);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw IoError("failed writing image " + path.string());
}

}  // namespace trimodal
