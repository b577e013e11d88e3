#include "trimodal/dataset.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "trimodal/audio_channel.hpp"
#include "trimodal/errors.hpp"
#include "trimodal/text_channel.hpp"
#include "trimodal/wav.hpp"

namespace trimodal {

namespace {

std::vector<std::string> split_on(const std::string& line, char sep) {
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    const std::size_t next = line.find(sep, pos);
    if (next == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
  return fields;
}

double parse_label(const std::string& field, char trait, std::size_t line_no) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &consumed);
  } catch (const std::exception&) {
    throw ParseError(std::string("label ") + trait + " is not a number: '" + field + "'", line_no);
  }
  if (consumed != field.size()) {
    throw ParseError(std::string("label ") + trait + " has trailing characters: '" + field + "'",
                     line_no);
  }
  if (value < 0.0 || value > 1.0) {
    throw ValidationError(std::string("label ") + trait + " out of [0,1]: " + field + " (line " +
                          std::to_string(line_no) + ")");
  }
  return value;
}

std::string unquote_transcript(const std::string& field, std::size_t line_no) {
  if (field.size() < 2 || field.front() != '"' || field.back() != '"') {
    throw ParseError("transcript field must be double-quoted", line_no);
  }
  std::string inner = field.substr(1, field.size() - 2);
  std::string out;
  out.reserve(inner.size());
  for (std::size_t i = 0; i < inner.size(); ++i) {
    if (inner[i] == '"' && i + 1 < inner.size() && inner[i + 1] == '"') {
      out.push_back('"');
      ++i;
    } else {
      out.push_back(inner[i]);
    }
  }
  return out;
}

std::string quote_transcript(const std::string& raw) {
  std::string out = "\"";
  for (char c : raw) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string resolve(const std::filesystem::path& base, const std::string& path) {
  std::filesystem::path p(path);
  if (p.is_absolute()) return p.string();
  return (base / p).lexically_normal().string();
}

void require_exists(const std::string& path, std::size_t line_no) {
  if (!std::filesystem::exists(path)) {
    throw IoError("referenced file does not exist: " + path + " (manifest line " +
                  std::to_string(line_no) + ")");
  }
}

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

}  // namespace

DatasetSplit parse_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open manifest " + path.string());
  const std::filesystem::path base = path.parent_path();

  DatasetSplit split;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const std::vector<std::string> fields = split_on(line, '\t');
    if (fields.size() != 10) {
      throw ParseError("expected 10 tab-separated fields, got " + std::to_string(fields.size()),
                       line_no);
    }
    ClipRecord record;
    record.clip_id = fields[0];
    record.split = fields[1];
    if (record.clip_id.empty()) throw ParseError("empty clip id", line_no);
    if (record.split != "train" && record.split != "val" && record.split != "test") {
      throw ParseError("split must be train, val or test; got '" + record.split + "'", line_no);
    }
    if (!seen_ids.insert(record.clip_id).second) {
      throw ValidationError("duplicate clip id '" + record.clip_id + "' (line " +
                            std::to_string(line_no) + ")");
    }
    record.audio_path = resolve(base, fields[2]);
    require_exists(record.audio_path, line_no);

    const std::string& visual = fields[3];
    if (visual.empty()) throw ParseError("empty frame/feature field", line_no);
    if (ends_with(visual, ".feat")) {
      record.feature_path = resolve(base, visual);
      require_exists(record.feature_path, line_no);
    } else {
      for (const std::string& frame : split_on(visual, ',')) {
        record.frame_paths.push_back(resolve(base, frame));
        require_exists(record.frame_paths.back(), line_no);
      }
    }

    record.transcript = unquote_transcript(fields[4], line_no);
    for (std::size_t i = 0; i < kTraitCount; ++i) {
      record.labels[i] = parse_label(fields[5 + i], kTraitNames[i], line_no);
    }

    if (record.split == "train") split.train.push_back(std::move(record));
    else if (record.split == "val") split.validation.push_back(std::move(record));
    else split.test.push_back(std::move(record));
  }

  if (split.total() == 0) {
    throw ValidationError("empty dataset: manifest " + path.string() + " has no records");
  }
  return split;
}

void write_manifest(const std::filesystem::path& path, const std::vector<ClipRecord>& records) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write manifest " + path.string());
  char label[32];
  for (const ClipRecord& record : records) {
    std::string visual;
    if (!record.feature_path.empty()) {
      visual = record.feature_path;
    } else {
      for (const std::string& frame : record.frame_paths) {
        if (!visual.empty()) visual += ",";
        visual += frame;
      }
    }
    out << record.clip_id << '\t' << record.split << '\t' << record.audio_path << '\t' << visual
        << '\t' << quote_transcript(record.transcript);
    for (std::size_t i = 0; i < kTraitCount; ++i) {
      std::snprintf(label, sizeof label, "%.17g", record.labels[i]);
      out << '\t' << label;
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing manifest " + path.string());
}

std::vector<std::pair<std::string, FeatureVector>> parse_feature_file(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature file " + path.string());
  std::vector<std::pair<std::string, FeatureVector>> out;
  std::string line;
  std::size_t line_no = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string id;
    if (!(row >> id)) throw ParseError("missing clip id", line_no);
    FeatureVector features;
    double v;
    while (row >> v) features.values.push_back(v);
    if (features.values.empty()) throw ParseError("no feature values for " + id, line_no);
    if (dim == 0) dim = features.values.size();
    if (features.values.size() != dim) {
      throw ParseError("inconsistent feature dimension for " + id + ": expected " +
                           std::to_string(dim) + ", got " + std::to_string(features.values.size()),
                       line_no);
    }
    out.emplace_back(std::move(id), std::move(features));
  }
  if (out.empty()) throw ValidationError("feature file " + path.string() + " is empty");
  return out;
}

ClipData load_clip(const ClipRecord& record) {
  ClipData clip;
  clip.clip_id = record.clip_id;
  clip.audio = resample_to_8khz(read_wav(record.audio_path));
  clip.transcript = normalize_text(record.transcript);
  clip.frame_paths = record.frame_paths;
  clip.labels = record.labels;
  if (!record.feature_path.empty()) {
    for (auto& [id, features] : parse_feature_file(record.feature_path)) {
      if (id == record.clip_id) {
        clip.features = std::move(features);
        break;
      }
    }
    if (!clip.features) {
      throw ValidationError("feature file " + record.feature_path + " has no entry for clip " +
                            record.clip_id);
    }
  }
  return clip;
}

std::vector<ClipData> load_clips(const std::vector<ClipRecord>& records) {
  // Feature files are shared across clips; parse each one once.
  std::unordered_map<std::string, std::unordered_map<std::string, FeatureVector>> feature_files;
  for (const ClipRecord& record : records) {
    if (record.feature_path.empty() || feature_files.count(record.feature_path)) continue;
    auto& table = feature_files[record.feature_path];
    for (auto& [id, features] : parse_feature_file(record.feature_path)) {
      table[id] = std::move(features);
    }
  }

  std::vector<ClipData> out;
  out.reserve(records.size());
  for (const ClipRecord& record : records) {
    ClipData clip;
    clip.clip_id = record.clip_id;
    clip.audio = resample_to_8khz(read_wav(record.audio_path));
    clip.transcript = normalize_text(record.transcript);
    clip.frame_paths = record.frame_paths;
    clip.labels = record.labels;
    if (!record.feature_path.empty()) {
      const auto& table = feature_files[record.feature_path];
      auto it = table.find(record.clip_id);
      if (it == table.end()) {
        throw ValidationError("feature file " + record.feature_path + " has no entry for clip " +
                              record.clip_id);
      }
      clip.features = it->second;
    }
    out.push_back(std::move(clip));
  }
  return out;
}

}  // namespace trimodal
