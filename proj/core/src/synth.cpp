#include "trimodal/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "trimodal/errors.hpp"
#include "trimodal/image.hpp"
#include "trimodal/rng.hpp"
#include "trimodal/wav.hpp"

namespace trimodal {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

const std::vector<std::string>& positive_lexicon() {
  static const std::vector<std::string> words = {"good",      "great", "happy", "nice",
                                                 "wonderful", "glad",  "love",  "fine"};
  return words;
}

const std::vector<std::string>& energy_lexicon() {
  static const std::vector<std::string> words = {"wow", "fast", "loud", "run", "jump", "big"};
  return words;
}

const std::vector<std::string>& neutral_lexicon() {
  static const std::vector<std::string> words = {
      "the",   "a",     "to",    "and",   "it",    "of",    "in",    "day",
      "thing", "time",  "house", "water", "road",  "tree",  "chair", "table",
      "paper", "stone", "cloud", "light", "door",  "floor", "wall",  "field"};
  return words;
}

void fisher_yates(std::vector<std::string>& items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    std::swap(items[i - 1], items[rng.uniform_index(i)]);
  }
}

}  // namespace

void SynthConfig::validate() const {
  if (n_clips < 3) throw ParameterError("synth: n_clips must be at least 3");
  if (clip_seconds <= 0.0 || sample_rate <= 0) throw ParameterError("synth: bad clip size");
  if (frame_size < 8) throw ParameterError("synth: frame_size must be at least 8");
  if (frames_per_clip == 0) throw ParameterError("synth: frames_per_clip must be positive");
  if (words_per_clip < 8) throw ParameterError("synth: words_per_clip must be at least 8");
}

SynthResult synth_generate(const SynthConfig& config, const std::filesystem::path& out_dir) {
  config.validate();

  const std::size_t n_test = std::max<std::size_t>(1, config.n_clips / 5);
  const std::size_t n_val = std::max<std::size_t>(1, config.n_clips / 5);
  if (n_test + n_val >= config.n_clips) {
    throw ValidationError("synth: n_clips=" + std::to_string(config.n_clips) +
                          " is too small to split into train/val/test");
  }
  const std::size_t n_train = config.n_clips - n_val - n_test;

  std::error_code ec;
  std::filesystem::create_directories(out_dir / "audio", ec);
  std::filesystem::create_directories(out_dir / "frames", ec);
  if (ec) throw IoError("cannot create corpus directories under " + out_dir.string());

  Rng rng(config.seed);
  const std::size_t n_samples =
      static_cast<std::size_t>(config.clip_seconds * config.sample_rate);

  SynthResult result;
  std::vector<ClipRecord> records;
  records.reserve(config.n_clips);

  for (std::size_t index = 0; index < config.n_clips; ++index) {
    char id_buf[32];
    std::snprintf(id_buf, sizeof id_buf, "clip%05zu", index);
    const std::string clip_id = id_buf;

    SynthClipInfo info;
    info.clip_id = clip_id;
    for (double& label : info.labels) label = rng.uniform(0.1, 0.9);
    const double e = info.labels[0], a = info.labels[1], c = info.labels[2],
                 n = info.labels[3], o = info.labels[4];

    // --- audio ---
    info.amplitude = 0.1 + 0.8 * e;
    info.tone_hz = config.tone_base_hz + config.tone_span_hz * n;
    info.leak_tone_hz = config.leak_tone_base_hz + config.leak_tone_span_hz * o;
    info.noise_sigma = config.noise_base + config.noise_span * n;
    const double phase1 = rng.uniform(0.0, kTwoPi);
    const double phase2 = rng.uniform(0.0, kTwoPi);

    AudioClip clip;
    clip.sample_rate = config.sample_rate;
    clip.samples.resize(n_samples);
    const double rate = static_cast<double>(config.sample_rate);
    for (std::size_t t = 0; t < n_samples; ++t) {
      const double time = static_cast<double>(t) / rate;
      double s = info.amplitude * std::sin(kTwoPi * info.tone_hz * time + phase1) +
                 config.leak_tone_amplitude * std::sin(kTwoPi * info.leak_tone_hz * time + phase2) +
                 info.noise_sigma * rng.normal();
      clip.samples[t] = std::clamp(s, -0.999, 0.999);
    }
    const std::filesystem::path wav_path = out_dir / "audio" / (clip_id + ".wav");
    write_wav(wav_path, clip);

    // --- text ---
    info.sentence_count = static_cast<std::size_t>(
        std::clamp(std::lround(8.0 * c), 1L, 7L));
    info.word_count = config.words_per_clip + rng.uniform_index(5);
    std::size_t n_pos = static_cast<std::size_t>(std::lround(a * static_cast<double>(info.word_count)));
    std::size_t n_energy = static_cast<std::size_t>(
        std::lround((0.15 + 0.25 * e) * static_cast<double>(info.word_count)));
    if (n_pos + n_energy > info.word_count) n_energy = info.word_count - n_pos;
    info.positive_fraction = static_cast<double>(n_pos) / static_cast<double>(info.word_count);

    std::vector<std::string> words;
    words.reserve(info.word_count);
    for (std::size_t i = 0; i < n_pos; ++i) {
      words.push_back(positive_lexicon()[rng.uniform_index(positive_lexicon().size())]);
    }
    for (std::size_t i = 0; i < n_energy; ++i) {
      words.push_back(energy_lexicon()[rng.uniform_index(energy_lexicon().size())]);
    }
    while (words.size() < info.word_count) {
      words.push_back(neutral_lexicon()[rng.uniform_index(neutral_lexicon().size())]);
    }
    fisher_yates(words, rng);

    std::string transcript;
    const std::size_t per_sentence = info.word_count / info.sentence_count;
    const std::size_t remainder = info.word_count % info.sentence_count;
    std::size_t word_index = 0;
    for (std::size_t s = 0; s < info.sentence_count; ++s) {
      const std::size_t count = per_sentence + (s < remainder ? 1 : 0);
      for (std::size_t k = 0; k < count && word_index < words.size(); ++k, ++word_index) {
        if (k > 0) transcript += " ";
        transcript += words[word_index];
      }
      transcript += ". ";
    }

    // --- frames ---
    info.blue_mean = 0.15 + 0.7 * o;
    info.red_mean = 0.4 + 0.2 * a;
    const double green_mean = 0.5;
    // Clip-specific zero-mean texture shared by the clip's frames. It leaves
    // the planted channel means untouched but spreads clips apart in feature
    // space, the way real appearance does.
    const double pattern_fx = 1.0 + static_cast<double>(rng.uniform_index(4));
    const double pattern_fy = 1.0 + static_cast<double>(rng.uniform_index(4));
    const double pattern_phase[3] = {rng.uniform(0.0, kTwoPi), rng.uniform(0.0, kTwoPi),
                                     rng.uniform(0.0, kTwoPi)};
    std::vector<std::string> frame_paths;
    const std::size_t plane = config.frame_size * config.frame_size;
    const double size = static_cast<double>(config.frame_size);
    for (std::size_t f = 0; f < config.frames_per_clip; ++f) {
      FrameImage frame;
      frame.height = config.frame_size;
      frame.width = config.frame_size;
      frame.pixels.resize(3 * plane);
      const double jitter = rng.uniform(-0.02, 0.02);  // per-frame brightness wobble
      const double means[3] = {info.blue_mean + jitter, info.red_mean + jitter,
                               green_mean + jitter};
      for (std::size_t ch = 0; ch < 3; ++ch) {
        for (std::size_t y = 0; y < config.frame_size; ++y) {
          for (std::size_t x = 0; x < config.frame_size; ++x) {
            const double texture =
                0.12 * std::sin(kTwoPi * (pattern_fx * x + pattern_fy * y) / size +
                                pattern_phase[ch]);
            frame.pixels[ch * plane + y * config.frame_size + x] =
                std::clamp(means[ch] + texture + rng.uniform(-0.05, 0.05), 0.0, 1.0);
          }
        }
      }
      char frame_buf[48];
      std::snprintf(frame_buf, sizeof frame_buf, "%s_%zu.ppm", clip_id.c_str(), f);
      const std::filesystem::path frame_path = out_dir / "frames" / frame_buf;
      write_ppm(frame_path, frame);
      frame_paths.push_back(frame_path.string());
    }

    ClipRecord record;
    record.clip_id = clip_id;
    record.split = index < n_train ? "train" : (index < n_train + n_val ? "val" : "test");
    record.audio_path = wav_path.string();
    record.frame_paths = std::move(frame_paths);
    record.transcript = transcript;
    record.labels = info.labels;
    records.push_back(std::move(record));
    result.clips.push_back(std::move(info));
  }

  result.manifest_path = out_dir / "manifest.tsv";
  write_manifest(result.manifest_path, records);

  // Planted parameters, so tests and humans can check what was encoded.
  {
    std::ofstream meta(out_dir / "meta.tsv");
    meta << "clip_id\tE\tA\tC\tN\tO\tamplitude\ttone_hz\tleak_tone_hz\tnoise_sigma"
            "\tsentences\twords\tpositive_fraction\tblue_mean\tred_mean\n";
    char buf[64];
    for (const SynthClipInfo& info : result.clips) {
      meta << info.clip_id;
      for (double label : info.labels) {
        std::snprintf(buf, sizeof buf, "\t%.6f", label);
        meta << buf;
      }
      std::snprintf(buf, sizeof buf, "\t%.6f\t%.2f\t%.2f\t%.6f", info.amplitude, info.tone_hz,
                    info.leak_tone_hz, info.noise_sigma);
      meta << buf << '\t' << info.sentence_count << '\t' << info.word_count;
      std::snprintf(buf, sizeof buf, "\t%.6f\t%.6f\t%.6f", info.positive_fraction, info.blue_mean,
                    info.red_mean);
      meta << buf << '\n';
    }
  }

  result.split = parse_manifest(result.manifest_path);
  return result;
}

}  // namespace trimodal
