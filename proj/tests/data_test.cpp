#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <fstream>

#include "doctest.h"
#include "trimodal/dataset.hpp"
#include "trimodal/embeddings.hpp"
#include "trimodal/errors.hpp"
#include "trimodal/image.hpp"
#include "trimodal/rng.hpp"
#include "trimodal/synth.hpp"
#include "trimodal/wav.hpp"

using namespace trimodal;

namespace {

namespace fs = std::filesystem;

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

std::string file_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("wav sample scaling") {
  TempDir dir("trimodal_wav_scale");
  // Hand-built mono wav with three known samples.
  AudioClip clip;
  clip.sample_rate = 8000;
  clip.samples = {16384.0 / 32768.0, -1.0, 0.0};
  const fs::path path = dir.path / "scale.wav";
  write_wav(path, clip);
  const AudioClip read = read_wav(path);
  CHECK(read.sample_rate == 8000);
  REQUIRE(read.samples.size() == 3);
  CHECK(read.samples[0] == doctest::Approx(0.5));
  CHECK(read.samples[1] == doctest::Approx(-1.0));
  CHECK(read.samples[2] == doctest::Approx(0.0));
}

TEST_CASE("wav round-trip stays within one quantization step") {
  TempDir dir("trimodal_wav_roundtrip");
  Rng rng(1);
  AudioClip clip;
  clip.sample_rate = 16000;
  clip.samples.resize(2048);
  for (double& s : clip.samples) s = rng.uniform(-0.999, 0.999);
  const fs::path path = dir.path / "roundtrip.wav";
  write_wav(path, clip);
  const AudioClip read = read_wav(path);
  REQUIRE(read.samples.size() == clip.samples.size());
  for (std::size_t i = 0; i < clip.samples.size(); ++i) {
    CHECK(std::abs(read.samples[i] - clip.samples[i]) <= 1.0 / 32768.0);
  }
}

TEST_CASE("stereo wav averages the channels") {
  TempDir dir("trimodal_wav_stereo");
  // Write a stereo file by hand: L = 0.2, R = 0.4 for every frame.
  const fs::path path = dir.path / "stereo.wav";
  {
    const std::int16_t left = static_cast<std::int16_t>(std::lround(0.2 * 32768.0));
    const std::int16_t right = static_cast<std::int16_t>(std::lround(0.4 * 32768.0));
    const std::uint32_t n_frames = 16;
    const std::uint32_t data_size = n_frames * 4;
    std::ofstream out(path, std::ios::binary);
    auto u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto u16 = [&](std::uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };
    out.write("RIFF", 4);
    u32(36 + data_size);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    u32(16);
    u16(1);
    u16(2);
    u32(8000);
    u32(8000 * 4);
    u16(4);
    u16(16);
    out.write("data", 4);
    u32(data_size);
    for (std::uint32_t i = 0; i < n_frames; ++i) {
      u16(static_cast<std::uint16_t>(left));
      u16(static_cast<std::uint16_t>(right));
    }
  }
  const AudioClip read = read_wav(path);
  REQUIRE(read.samples.size() == 16);
  for (double s : read.samples) CHECK(s == doctest::Approx(0.3).epsilon(1e-4));
}

TEST_CASE("non-PCM wav is rejected") {
  TempDir dir("trimodal_wav_badfmt");
  const fs::path path = dir.path / "float.wav";
  {
    std::ofstream out(path, std::ios::binary);
    auto u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
    auto u16 = [&](std::uint16_t v) { out.write(reinterpret_cast<const char*>(&v), 2); };
    out.write("RIFF", 4);
    u32(36 + 8);
    out.write("WAVE", 4);
    out.write("fmt ", 4);
    u32(16);
    u16(3);  // IEEE float, unsupported
    u16(1);
    u32(8000);
    u32(8000 * 4);
    u16(4);
    u16(32);
    out.write("data", 4);
    u32(8);
    u32(0);
    u32(0);
  }
  CHECK_THROWS_AS(read_wav(path), UnsupportedFormatError);
}

TEST_CASE("truncated wav is an I/O error") {
  TempDir dir("trimodal_wav_trunc");
  AudioClip clip;
  clip.sample_rate = 8000;
  clip.samples.assign(256, 0.25);
  const fs::path path = dir.path / "trunc.wav";
  write_wav(path, clip);
  const std::string bytes = file_bytes(path);
  {
    std::ofstream out(path, std::ios::binary);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size() / 2));
  }
  CHECK_THROWS_AS(read_wav(path), IoError);
}

TEST_CASE("ppm round-trip within one 8-bit step, planes in blue-red-green order") {
  TempDir dir("trimodal_ppm");
  Rng rng(2);
  FrameImage frame;
  frame.height = 6;
  frame.width = 5;
  frame.pixels.resize(3 * 30);
  for (double& p : frame.pixels) p = rng.uniform(0.0, 1.0);
  const fs::path path = dir.path / "frame.ppm";
  write_ppm(path, frame);
  const FrameImage read = read_ppm(path);
  REQUIRE(read.height == 6);
  REQUIRE(read.width == 5);
  for (std::size_t i = 0; i < frame.pixels.size(); ++i) {
    CHECK(std::abs(read.pixels[i] - frame.pixels[i]) <= 1.0 / 255.0);
  }
}

TEST_CASE("embeddings load with declared size and dim") {
  TempDir dir("trimodal_emb");
  const fs::path path = dir.path / "table.txt";
  {
    std::ofstream out(path);
    out << "2 3\n";
    out << "hello 0.1 0.2 0.3\n";
    out << "world -1 -2 -3\n";
  }
  const EmbeddingTable table = EmbeddingTable::load(path);
  CHECK(table.vocab_size() == 2);
  CHECK(table.dim() == 3);
  CHECK(table.lookup("hello")[1] == doctest::Approx(0.2));
  CHECK(table.lookup("absent") == std::vector<double>(3, 0.0));
}

TEST_CASE("embedding dim mismatch is a parse error with the line number") {
  TempDir dir("trimodal_emb_bad");
  const fs::path path = dir.path / "bad.txt";
  {
    std::ofstream out(path);
    out << "2 3\n";
    out << "ok 1 2 3\n";
    out << "short 1 2\n";
  }
  try {
    EmbeddingTable::load(path);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 3);
  }
}

TEST_CASE("duplicate embedding keeps the last entry") {
  TempDir dir("trimodal_emb_dup");
  const fs::path path = dir.path / "dup.txt";
  {
    std::ofstream out(path);
    out << "2 2\n";
    out << "token 1 1\n";
    out << "token 2 2\n";
  }
  const EmbeddingTable table = EmbeddingTable::load(path);
  CHECK(table.vocab_size() == 1);
  CHECK(table.lookup("token")[0] == doctest::Approx(2.0));
}

TEST_CASE("manifest parsing and validation errors") {
  TempDir dir("trimodal_manifest");
  AudioClip clip;
  clip.sample_rate = 8000;
  clip.samples.assign(64, 0.1);
  write_wav(dir.path / "a.wav", clip);
  FrameImage frame;
  frame.height = frame.width = 4;
  frame.pixels.assign(48, 0.5);
  write_ppm(dir.path / "f.ppm", frame);

  const fs::path manifest = dir.path / "manifest.tsv";

  SUBCASE("empty manifest") {
    std::ofstream(manifest) << "";
    CHECK_THROWS_AS(parse_manifest(manifest), ValidationError);
  }

  SUBCASE("well-formed record") {
    std::ofstream(manifest) << "c1\ttrain\ta.wav\tf.ppm\t\"hi there.\"\t0.5\t0.5\t0.5\t0.5\t0.5\n";
    const DatasetSplit split = parse_manifest(manifest);
    REQUIRE(split.train.size() == 1);
    CHECK(split.train[0].clip_id == "c1");
    CHECK(split.train[0].transcript == "hi there.");
    CHECK(split.train[0].labels[0] == 0.5);
  }

  SUBCASE("label out of range names the trait") {
    std::ofstream(manifest) << "c1\ttrain\ta.wav\tf.ppm\t\"hi.\"\t0.5\t1.2\t0.5\t0.5\t0.5\n";
    try {
      parse_manifest(manifest);
      FAIL("expected ValidationError");
    } catch (const ValidationError& e) {
      CHECK(std::string(e.what()).find("A") != std::string::npos);
    }
  }

  SUBCASE("duplicate clip ids across splits") {
    std::ofstream(manifest) << "c1\ttrain\ta.wav\tf.ppm\t\"hi.\"\t0.5\t0.5\t0.5\t0.5\t0.5\n"
                            << "c1\ttest\ta.wav\tf.ppm\t\"hi.\"\t0.5\t0.5\t0.5\t0.5\t0.5\n";
    CHECK_THROWS_AS(parse_manifest(manifest), ValidationError);
  }

  SUBCASE("malformed line reports its number") {
    std::ofstream(manifest) << "c1\ttrain\ta.wav\tf.ppm\t\"hi.\"\t0.5\t0.5\t0.5\t0.5\t0.5\n"
                            << "c2\ttrain\ta.wav\n";
    try {
      parse_manifest(manifest);
      FAIL("expected ParseError");
    } catch (const ParseError& e) {
      CHECK(e.line() == 2);
    }
  }

  SUBCASE("missing file is an I/O error") {
    std::ofstream(manifest) << "c1\ttrain\tnope.wav\tf.ppm\t\"hi.\"\t0.5\t0.5\t0.5\t0.5\t0.5\n";
    CHECK_THROWS_AS(parse_manifest(manifest), IoError);
  }

  SUBCASE("bad split name") {
    std::ofstream(manifest) << "c1\tdev\ta.wav\tf.ppm\t\"hi.\"\t0.5\t0.5\t0.5\t0.5\t0.5\n";
    CHECK_THROWS_AS(parse_manifest(manifest), ParseError);
  }
}

TEST_CASE("feature files load per clip id") {
  TempDir dir("trimodal_feat");
  AudioClip clip;
  clip.sample_rate = 8000;
  clip.samples.assign(64, 0.1);
  write_wav(dir.path / "a.wav", clip);
  const fs::path feat = dir.path / "clips.feat";
  std::ofstream(feat) << "c1 1 2 3 4\nc2 5 6 7 8\n";
  const fs::path manifest = dir.path / "manifest.tsv";
  std::ofstream(manifest) << "c2\ttrain\ta.wav\tclips.feat\t\"hi.\"\t0.5\t0.5\t0.5\t0.5\t0.5\n";

  const DatasetSplit split = parse_manifest(manifest);
  const std::vector<ClipData> clips = load_clips(split.train);
  REQUIRE(clips.size() == 1);
  REQUIRE(clips[0].features.has_value());
  CHECK(clips[0].features->values == std::vector<double>{5, 6, 7, 8});
}

TEST_CASE("synthetic corpus is bit-deterministic in its seed") {
  TempDir dir_a("trimodal_synth_a");
  TempDir dir_b("trimodal_synth_b");
  SynthConfig config;
  config.n_clips = 6;
  config.seed = 99;
  config.clip_seconds = 0.75;
  config.frame_size = 16;
  const SynthResult a = synth_generate(config, dir_a.path);
  const SynthResult b = synth_generate(config, dir_b.path);

  REQUIRE(a.clips.size() == b.clips.size());
  for (std::size_t i = 0; i < a.clips.size(); ++i) {
    CHECK(a.clips[i].labels == b.clips[i].labels);
    CHECK(file_bytes(dir_a.path / "audio" / (a.clips[i].clip_id + ".wav")) ==
          file_bytes(dir_b.path / "audio" / (b.clips[i].clip_id + ".wav")));
  }
  CHECK(file_bytes(dir_a.path / "manifest.tsv").size() > 0);
}

TEST_CASE("planted amplitude follows 0.1 + 0.8 * E") {
  TempDir dir("trimodal_synth_amp");
  SynthConfig config;
  config.n_clips = 12;
  config.seed = 5;
  config.clip_seconds = 0.5;
  config.frame_size = 16;
  const SynthResult result = synth_generate(config, dir.path);
  for (const SynthClipInfo& info : result.clips) {
    CHECK(info.amplitude == doctest::Approx(0.1 + 0.8 * info.labels[0]).epsilon(1e-12));
  }
  // Extremes of the rule: E=0.9 maps to amplitude 0.82, E=0.1 to 0.18.
  CHECK((0.1 + 0.8 * 0.9) / (0.1 + 0.8 * 0.1) == doctest::Approx(0.82 / 0.18).epsilon(1e-12));
}

TEST_CASE("labels are close to uniform on [0.1, 0.9]") {
  TempDir dir("trimodal_synth_ks");
  SynthConfig config;
  config.n_clips = 1000;
  config.seed = 31;
  config.clip_seconds = 0.02;  // keep the corpus tiny; only labels matter here
  config.frame_size = 8;
  config.frames_per_clip = 1;
  const SynthResult result = synth_generate(config, dir.path);

  std::vector<double> pooled;
  pooled.reserve(5000);
  for (const SynthClipInfo& info : result.clips) {
    for (double label : info.labels) pooled.push_back(label);
  }
  std::sort(pooled.begin(), pooled.end());
  double ks = 0.0;
  const double n = static_cast<double>(pooled.size());
  for (std::size_t i = 0; i < pooled.size(); ++i) {
    const double cdf = std::clamp((pooled[i] - 0.1) / 0.8, 0.0, 1.0);
    ks = std::max(ks, std::abs(cdf - static_cast<double>(i + 1) / n));
    ks = std::max(ks, std::abs(cdf - static_cast<double>(i) / n));
  }
  CHECK(ks < 0.05);
}

TEST_CASE("synth round-trips through the manifest") {
  TempDir dir("trimodal_synth_roundtrip");
  SynthConfig config;
  config.n_clips = 5;
  config.seed = 7;
  config.clip_seconds = 0.5;
  config.frame_size = 16;
  const SynthResult result = synth_generate(config, dir.path);

  CHECK(result.split.train.size() == 3);
  CHECK(result.split.validation.size() == 1);
  CHECK(result.split.test.size() == 1);

  const DatasetSplit reread = parse_manifest(result.manifest_path);
  REQUIRE(reread.total() == 5);

  // Labels survive exactly; audio within WAV quantization.
  std::vector<const ClipRecord*> all;
  for (const auto* list : {&reread.train, &reread.validation, &reread.test}) {
    for (const ClipRecord& r : *list) all.push_back(&r);
  }
  for (const ClipRecord* record : all) {
    const SynthClipInfo* info = nullptr;
    for (const SynthClipInfo& candidate : result.clips) {
      if (candidate.clip_id == record->clip_id) info = &candidate;
    }
    REQUIRE(info != nullptr);
    for (std::size_t i = 0; i < kTraitCount; ++i) CHECK(record->labels[i] == info->labels[i]);
    const AudioClip audio = read_wav(record->audio_path);
    CHECK(audio.sample_rate == 8000);
  }
}

TEST_CASE("too-small corpora are rejected") {
  TempDir dir("trimodal_synth_small");
  SynthConfig config;
  config.n_clips = 2;
  CHECK_THROWS_AS(synth_generate(config, dir.path), ParameterError);
}

TEST_CASE("split sizes are 60/20/20 for 100 clips") {
  TempDir dir("trimodal_synth_split");
  SynthConfig config;
  config.n_clips = 100;
  config.seed = 1;
  config.clip_seconds = 0.02;
  config.frame_size = 8;
  config.frames_per_clip = 1;
  const SynthResult result = synth_generate(config, dir.path);
  CHECK(result.split.train.size() == 60);
  CHECK(result.split.validation.size() == 20);
  CHECK(result.split.test.size() == 20);
}
