#include "trimodal/wav.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "trimodal/errors.hpp"

namespace trimodal {

namespace {

constexpr std::uint16_t kFormatPcm = 1;

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 16) & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 24) & 0xff));
}

void put_u16(std::vector<unsigned char>& out, std::uint16_t v) {
  out.push_back(static_cast<unsigned char>(v & 0xff));
  out.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

}  // namespace

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open wav file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (bytes.size() < 12 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0) {
    throw UnsupportedFormatError(path.string() + " is not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t sample_rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_size = 0;

  std::size_t offset = 12;
  while (offset + 8 <= bytes.size()) {
    const unsigned char* chunk = bytes.data() + offset;
    const std::uint32_t chunk_size = read_u32(chunk + 4);
    const std::size_t payload = offset + 8;
    if (payload + chunk_size > bytes.size()) {
      throw IoError("truncated wav chunk in " + path.string());
    }
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16) throw IoError("truncated fmt chunk in " + path.string());
      format = read_u16(bytes.data() + payload);
      channels = read_u16(bytes.data() + payload + 2);
      sample_rate = read_u32(bytes.data() + payload + 4);
      bits = read_u16(bytes.data() + payload + 14);
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      data = bytes.data() + payload;
      data_size = chunk_size;
    }
    offset = payload + chunk_size + (chunk_size & 1);  // chunks are 2-byte aligned
  }

  if (!have_fmt || data == nullptr) {
    throw IoError("wav file " + path.string() + " is missing fmt or data chunk");
  }
  if (format != kFormatPcm) {
    throw UnsupportedFormatError("wav file " + path.string() +
                                 " is not integer PCM (format tag " + std::to_string(format) + ")");
  }
  if (bits != 16) {
    throw UnsupportedFormatError("wav file " + path.string() + " must be 16-bit PCM, got " +
                                 std::to_string(bits) + "-bit");
  }
  if (channels != 1 && channels != 2) {
    throw UnsupportedFormatError("wav file " + path.string() + " must be mono or stereo");
  }

  const std::size_t frame_bytes = 2u * channels;
  const std::size_t n_frames = data_size / frame_bytes;
  if (n_frames == 0) throw IoError("wav file " + path.string() + " has no samples");

  AudioClip clip;
  clip.sample_rate = static_cast<int>(sample_rate);
  clip.samples.resize(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const unsigned char* frame = data + i * frame_bytes;
    const auto left = static_cast<std::int16_t>(read_u16(frame));
    if (channels == 1) {
      clip.samples[i] = left / 32768.0;
    } else {
      const auto right = static_cast<std::int16_t>(read_u16(frame + 2));
      clip.samples[i] = (left / 32768.0 + right / 32768.0) / 2.0;
    }
  }
  return clip;
}

void write_wav(const std::filesystem::path& path, const AudioClip& clip) {
  if (clip.sample_rate <= 0) throw ParameterError("write_wav: sample rate must be positive");
  if (clip.samples.empty()) throw ParameterError("write_wav: empty clip");

  const std::uint32_t data_size = static_cast<std::uint32_t>(clip.samples.size() * 2);
  std::vector<unsigned char> out;
  out.reserve(44 + data_size);
  out.insert(out.end(), {'R', 'I', 'F', 'F'});
  put_u32(out, 36 + data_size);
  out.insert(out.end(), {'W', 'A', 'V', 'E'});
  out.insert(out.end(), {'f', 'm', 't', ' '});
  put_u32(out, 16);
  put_u16(out, kFormatPcm);
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * 2);
  put_u16(out, 2);   // block align
  put_u16(out, 16);  // bits per sample
  out.insert(out.end(), {'d', 'a', 't', 'a'});
  put_u32(out, data_size);
  for (double sample : clip.samples) {
    const long q = std::lround(std::clamp(sample, -1.0, 1.0) * 32768.0);
    const auto s = static_cast<std::int16_t>(std::clamp(q, -32768L, 32767L));
    put_u16(out, static_cast<std::uint16_t>(s));
  }

  std::ofstream file(path, std::ios::binary);
  if (!file) throw IoError("cannot write wav file " + path.string());
  file.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
  if (!file) throw IoError("failed writing wav file " + path.string());
}

}  // namespace trimodal
