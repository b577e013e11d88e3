#pragma once

#include <filesystem>

#include "trimodal/clip.hpp"

namespace trimodal {

// RIFF/WAVE, PCM 16-bit, mono or stereo. Samples scale to [-1, 1] by
// division by 32768; stereo averages to mono.
AudioClip read_wav(const std::filesystem::path& path);

// PCM 16-bit mono. Samples are clamped to [-1, 1] and rounded.
void write_wav(const std::filesystem::path& path, const AudioClip& clip);

}  // namespace trimodal
