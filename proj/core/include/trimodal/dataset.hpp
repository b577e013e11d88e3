#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "trimodal/clip.hpp"

namespace trimodal {

// One manifest row. Paths are resolved against the manifest's directory at
// parse time. The fourth manifest field is either a comma-separated list of
// frame images or a single ".feat" file of precomputed features.
struct ClipRecord {
  std::string clip_id;
  std::string split;  // "train", "val", "test"
  std::string audio_path;
  std::vector<std::string> frame_paths;
  std::string feature_path;
  std::string transcript;
  TraitVector labels{};
};

struct DatasetSplit {
  std::vector<ClipRecord> train;
  std::vector<ClipRecord> validation;
  std::vector<ClipRecord> test;

  std::size_t total() const { return train.size() + validation.size() + test.size(); }
};

// Manifest: one record per line, tab-separated:
//   clip_id  split  audio_path  frames_or_features  "transcript"  E A C N O
// Validates label ranges, split names, duplicate ids and file existence.
DatasetSplit parse_manifest(const std::filesystem::path& path);

void write_manifest(const std::filesystem::path& path, const std::vector<ClipRecord>& records);

// Decodes a record: WAV -> 8 kHz audio, transcript normalization, feature
// lookup when the record uses a feature file. Frames stay as paths and are
// loaded lazily by the video channel.
ClipData load_clip(const ClipRecord& record);
std::vector<ClipData> load_clips(const std::vector<ClipRecord>& records);

// Feature file: one line per clip, "clip_id v1 v2 ... vF".
std::vector<std::pair<std::string, FeatureVector>> parse_feature_file(
    const std::filesystem::path& path);

}  // namespace trimodal
