#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace trimodal {

// Trait scores in the fixed order E A C N O, each in [0, 1].
using TraitVector = std::array<double, 5>;

inline constexpr std::array<char, 5> kTraitNames = {'E', 'A', 'C', 'N', 'O'};
inline constexpr std::size_t kTraitCount = 5;

struct AudioClip {
  std::vector<double> samples;  // nominally in [-1, 1]
  int sample_rate = 0;          // Hz
};

struct Transcript {
  // Lowercased, punctuation-stripped words, one list per sentence.
  std::vector<std::vector<std::string>> sentences;
};

// Pixels are [3 x H x W] floats in [0, 1]; plane order blue, red, green.
struct FrameImage {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;
};

// Precomputed backbone output for a clip's chosen frame.
struct FeatureVector {
  std::vector<double> values;
};

// One example ready for the models: decoded 8 kHz audio, normalized
// transcript, frame paths (loaded lazily) or precomputed features, labels.
struct ClipData {
  std::string clip_id;
  AudioClip audio;
  Transcript transcript;
  std::vector<std::string> frame_paths;
  std::optional<FeatureVector> features;
  TraitVector labels{};
};

}  // namespace trimodal
