#pragma once

#include <cstdint>
#include <filesystem>

#include "trimodal/dataset.hpp"

namespace trimodal {

// Generator settings for the synthetic corpus. Each trait is planted in one
// modality strongly and leaked weakly into another, so fused models have
// strictly more signal available than any single channel:
//   E -> sinusoid amplitude (0.1 + 0.8*E), leaked into the text energy lexicon
//   A -> frequency of positive-lexicon tokens, leaked into the red frame mean
//   C -> sentence count (inverse sentence length under a fixed word budget)
//   N -> additive noise level and the main tone's frequency
//   O -> blue frame mean, leaked into a faint second tone's frequency
// The tone frequencies matter because training-time amplitude randomization
// erases absolute scale: frequency and amplitude ratios survive it.
struct SynthConfig {
  std::size_t n_clips = 100;
  std::uint64_t seed = 1;
  double clip_seconds = 2.0;
  int sample_rate = 8000;
  std::size_t frame_size = 64;
  std::size_t frames_per_clip = 3;

  double tone_base_hz = 200.0;
  double tone_span_hz = 600.0;  // main tone: base + span * N
  double leak_tone_base_hz = 1400.0;
  double leak_tone_span_hz = 1200.0;  // second tone: base + span * O
  double leak_tone_amplitude = 0.05;
  double noise_base = 0.02;
  double noise_span = 0.10;  // noise sigma: base + span * N
  std::size_t words_per_clip = 28;

  void validate() const;
};

// Planted ground truth per clip; also written to meta.tsv next to the corpus.
struct SynthClipInfo {
  std::string clip_id;
  TraitVector labels{};
  double amplitude = 0.0;
  double tone_hz = 0.0;
  double leak_tone_hz = 0.0;
  double noise_sigma = 0.0;
  std::size_t sentence_count = 0;
  std::size_t word_count = 0;
  double positive_fraction = 0.0;
  double blue_mean = 0.0;
  double red_mean = 0.0;
};

struct SynthResult {
  DatasetSplit split;
  std::filesystem::path manifest_path;
  std::vector<SynthClipInfo> clips;
};

// Writes WAV audio, PPM frames, manifest.tsv and meta.tsv under out_dir.
// Labels are uniform in [0.1, 0.9]; splits are 60/20/20. Deterministic given
// the seed.
SynthResult synth_generate(const SynthConfig& config, const std::filesystem::path& out_dir);

}  // namespace trimodal
