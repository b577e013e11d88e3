#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "doctest.h"
#include "trimodal/audio_channel.hpp"
#include "trimodal/errors.hpp"
#include "trimodal/fusion.hpp"
#include "trimodal/model_io.hpp"
#include "trimodal/wav.hpp"

using namespace trimodal;

namespace {

namespace fs = std::filesystem;

struct CliResult {
  int exit_code;
  std::string out;
};

CliResult run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("trimodal");
  for (const std::string& arg : args) argv.push_back(arg.c_str());

  std::ostringstream captured;
  std::streambuf* old = std::cout.rdbuf(captured.rdbuf());
  const int code = cli_main(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old);
  return {code, captured.str()};
}

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

// Small-model overrides that keep CLI tests fast.
const std::vector<std::string> kTinyAudio = {
    "--set", "audio.filters=4",      "--set", "audio.first_window=8",
    "--set", "audio.first_stride=4", "--set", "audio.later_window=2",
    "--set", "audio.later_stride=2", "--set", "audio.penultimate_dim=6"};

}  // namespace

TEST_CASE("synth is deterministic and reports the split") {
  TempDir dir_a("trimodal_cli_synth_a");
  TempDir dir_b("trimodal_cli_synth_b");
  const std::vector<std::string> base = {"synth",          "--n",          "10",   "--seed", "7",
                                         "--clip-seconds", "0.5",          "--frame-size", "16"};
  auto with_out = [&](const fs::path& out) {
    std::vector<std::string> args = base;
    args.push_back("--out");
    args.push_back(out.string());
    return args;
  };
  const CliResult a = run_cli(with_out(dir_a.path));
  const CliResult b = run_cli(with_out(dir_b.path));
  REQUIRE(a.exit_code == 0);
  REQUIRE(b.exit_code == 0);
  CHECK(a.out.find("train/val/test = 6/2/2") != std::string::npos);

  CHECK(file_bytes(dir_a.path / "manifest.tsv").size() > 0);
  for (const char* name : {"audio/clip00000.wav", "frames/clip00003_1.ppm", "meta.tsv"}) {
    CHECK(file_bytes(dir_a.path / name) == file_bytes(dir_b.path / name));
  }
}

TEST_CASE("synth with too few clips fails with a usage error") {
  TempDir dir("trimodal_cli_synth_tiny");
  const CliResult result =
      run_cli({"synth", "--n", "2", "--out", dir.path.string()});
  CHECK(result.exit_code == 1);
}

TEST_CASE("synth split sizes for 100 clips are 60/20/20") {
  TempDir dir("trimodal_cli_synth_100");
  const CliResult result = run_cli({"synth", "--n", "100", "--seed", "3", "--clip-seconds",
                                    "0.02", "--frame-size", "8", "--frames", "1", "--out",
                                    dir.path.string()});
  REQUIRE(result.exit_code == 0);
  CHECK(result.out.find("train/val/test = 60/20/20") != std::string::npos);
}

TEST_CASE("fusion training without channel checkpoints names the prerequisites") {
  TempDir dir("trimodal_cli_prereq");
  // Manifest is validated lazily after argument checks; a missing checkpoint
  // must fail first with a clear message.
  const CliResult result = run_cli({"train", "nnlb", "--manifest", "missing.tsv"});
  CHECK(result.exit_code != 0);
}

TEST_CASE("missing manifest is a data error") {
  const CliResult result =
      run_cli({"train", "audio", "--manifest", "/nonexistent/manifest.tsv"});
  CHECK(result.exit_code == 2);
}

TEST_CASE("unknown --set key is a usage error") {
  TempDir dir("trimodal_cli_badset");
  const CliResult synth = run_cli({"synth", "--n", "5", "--clip-seconds", "0.5", "--frame-size",
                                   "16", "--out", dir.path.string()});
  REQUIRE(synth.exit_code == 0);
  const CliResult result =
      run_cli({"train", "audio", "--manifest", (dir.path / "manifest.tsv").string(), "--set",
               "audio.bogus=1", "--epochs", "1", "--patience", "1"});
  CHECK(result.exit_code == 1);
}

TEST_CASE("synth, train, eval and predict chain end to end") {
  TempDir dir("trimodal_cli_chain");
  const CliResult synth = run_cli({"synth", "--n", "10", "--seed", "11", "--clip-seconds", "1.0",
                                   "--frame-size", "16", "--out", dir.path.string()});
  REQUIRE(synth.exit_code == 0);
  const std::string manifest = (dir.path / "manifest.tsv").string();

  std::vector<std::string> train_args = {"train", "audio",     "--manifest", manifest,
                                         "--out", dir.path.string(), "--epochs",  "2",
                                         "--patience", "2",    "--batch",    "4",
                                         "--seed", "1"};
  train_args.insert(train_args.end(), kTinyAudio.begin(), kTinyAudio.end());
  const CliResult trained = run_cli(train_args);
  REQUIRE(trained.exit_code == 0);
  CHECK(fs::exists(dir.path / "audio.ckpt"));
  CHECK(fs::exists(dir.path / "audio_history.tsv"));

  const CliResult eval = run_cli({"eval", "--manifest", manifest, "--split", "test", "--ckpt",
                                  (dir.path / "audio.ckpt").string(), "--baseline", "--tsv"});
  REQUIRE(eval.exit_code == 0);
  std::istringstream lines(eval.out);
  std::string header;
  std::getline(lines, header);
  CHECK(header == "model\tmean_mae\tmae_E\tmae_A\tmae_C\tmae_N\tmae_O\tmean_accuracy");
  std::string audio_row, baseline_row;
  std::getline(lines, audio_row);
  std::getline(lines, baseline_row);
  CHECK(audio_row.rfind("audio\t", 0) == 0);
  CHECK(baseline_row.rfind("baseline\t", 0) == 0);

  // accuracy column is 1 - mean MAE column
  {
    std::istringstream row(audio_row);
    std::string name;
    double mean_mae, e, a, c, n, o, mean_acc;
    row >> name >> mean_mae >> e >> a >> c >> n >> o >> mean_acc;
    CHECK(mean_acc == doctest::Approx(1.0 - mean_mae).epsilon(1e-3));
  }

  // Determinism: same training run gives an identical checkpoint.
  TempDir dir2("trimodal_cli_chain2");
  std::vector<std::string> train_again = train_args;
  for (std::size_t i = 0; i + 1 < train_again.size(); ++i) {
    if (train_again[i] == "--out") train_again[i + 1] = dir2.path.string();
  }
  const CliResult retrained = run_cli(train_again);
  REQUIRE(retrained.exit_code == 0);
  CHECK(file_bytes(dir.path / "audio.ckpt") == file_bytes(dir2.path / "audio.ckpt"));

  // Prediction on one clip of the corpus: five scores in [0, 1], stable.
  const std::string wav = (dir.path / "audio" / "clip00000.wav").string();
  const CliResult predict_a = run_cli(
      {"predict", "--ckpt", (dir.path / "audio.ckpt").string(), "--audio", wav});
  const CliResult predict_b = run_cli(
      {"predict", "--ckpt", (dir.path / "audio.ckpt").string(), "--audio", wav});
  REQUIRE(predict_a.exit_code == 0);
  CHECK(predict_a.out == predict_b.out);
  std::istringstream scores(predict_a.out);
  double v;
  int count = 0;
  while (scores >> v) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    ++count;
  }
  CHECK(count == 5);
}

TEST_CASE("predict with a zero checkpoint prints 0.5 for every trait") {
  TempDir dir("trimodal_cli_zero");
  AudioChannelConfig config;
  config.first_window = 8;
  config.first_stride = 4;
  config.later_window = 2;
  config.later_stride = 2;
  config.filters = 4;
  config.penultimate_dim = 6;
  AudioChannel channel(config, 1);
  for (Parameter* p : channel.parameters()) {
    for (double& v : p->tensor.values()) v = 0.0;
  }
  save_model(dir.path / "zero.ckpt", channel);

  AudioClip clip;
  clip.sample_rate = 8000;
  clip.samples.assign(4000, 0.25);
  write_wav(dir.path / "tone.wav", clip);

  const CliResult result = run_cli({"predict", "--ckpt", (dir.path / "zero.ckpt").string(),
                                    "--audio", (dir.path / "tone.wav").string()});
  REQUIRE(result.exit_code == 0);
  CHECK(result.out == "0.5000 0.5000 0.5000 0.5000 0.5000\n");
}

TEST_CASE("predict without the needed modality input is a usage error") {
  TempDir dir("trimodal_cli_missing_modality");
  AudioChannelConfig config;
  config.first_window = 8;
  config.first_stride = 4;
  config.later_window = 2;
  config.later_stride = 2;
  config.filters = 4;
  config.penultimate_dim = 6;
  AudioChannel channel(config, 1);
  save_model(dir.path / "audio.ckpt", channel);
  const CliResult result =
      run_cli({"predict", "--ckpt", (dir.path / "audio.ckpt").string()});
  CHECK(result.exit_code == 1);
}

TEST_CASE("fit-dlf writes a weights file whose rows sum to one") {
  TempDir dir("trimodal_cli_dlf");
  const CliResult synth = run_cli({"synth", "--n", "8", "--seed", "21", "--clip-seconds", "0.8",
                                   "--frame-size", "16", "--out", dir.path.string()});
  REQUIRE(synth.exit_code == 0);
  const std::string manifest = (dir.path / "manifest.tsv").string();

  // Untrained channels are fine for exercising the fitting interface.
  {
    AudioChannelConfig config;
    config.first_window = 8;
    config.first_stride = 4;
    config.later_window = 2;
    config.later_stride = 2;
    config.filters = 4;
    config.penultimate_dim = 6;
    AudioChannel audio(config, 1);
    save_model(dir.path / "audio.ckpt", audio);
    TextChannelConfig text_config;
    text_config.filters_per_width = 4;
    text_config.penultimate_dim = 6;
    TextChannel text(text_config, std::make_shared<EmbeddingTable>(EmbeddingTable::hashed(300)),
                     2);
    save_model(dir.path / "text.ckpt", text);
    VideoChannelConfig video_config;
    video_config.input_size = 16;
    video_config.head_hidden_dim = 8;
    VideoChannel video(video_config, 3);
    save_model(dir.path / "video.ckpt", video);
  }

  const CliResult fit = run_cli({"fit-dlf", "--manifest", manifest, "--audio-ckpt",
                                 (dir.path / "audio.ckpt").string(), "--text-ckpt",
                                 (dir.path / "text.ckpt").string(), "--video-ckpt",
                                 (dir.path / "video.ckpt").string(), "--out",
                                 (dir.path / "weights.tsv").string()});
  REQUIRE(fit.exit_code == 0);
  CHECK(fit.out.find("Weights") != std::string::npos);
  CHECK(fit.out.find("dev MAE") != std::string::npos);

  const FusionWeights weights = FusionWeights::load(dir.path / "weights.tsv");
  for (std::size_t i = 0; i < kTraitCount; ++i) {
    CHECK(std::abs(weights.w[i][0] + weights.w[i][1] + weights.w[i][2] - 1.0) <= 1e-9);
  }
}

TEST_CASE("eval on a missing or empty selection is a data error") {
  TempDir dir("trimodal_cli_eval_err");
  const CliResult result = run_cli({"eval", "--manifest", "/nonexistent.tsv", "--baseline"});
  CHECK(result.exit_code == 2);
}

TEST_CASE("a non-checkpoint file is rejected as unsupported") {
  TempDir dir("trimodal_cli_badckpt");
  std::ofstream(dir.path / "not_a_ckpt.bin") << "plain text";
  CHECK_THROWS_AS(load_checkpoint(dir.path / "not_a_ckpt.bin"), UnsupportedFormatError);
}

TEST_CASE("gradcheck ops scope passes from the command line") {
  const CliResult result = run_cli({"gradcheck", "ops", "--seeds", "5"});
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("conv1d") != std::string::npos);
  CHECK(result.out.find("FAIL") == std::string::npos);
}

TEST_CASE("checkpoints round-trip through save and load") {
  TempDir dir("trimodal_cli_ckpt_roundtrip");
  AudioChannelConfig config;
  config.first_window = 8;
  config.first_stride = 4;
  config.later_window = 2;
  config.later_stride = 2;
  config.filters = 3;
  config.penultimate_dim = 5;
  AudioChannel channel(config, 42);
  save_model(dir.path / "a.ckpt", channel);

  auto loaded = load_model(dir.path / "a.ckpt");
  REQUIRE(loaded != nullptr);
  CHECK(loaded->kind() == "audio");
  auto* audio = dynamic_cast<AudioChannel*>(loaded.get());
  REQUIRE(audio != nullptr);
  CHECK(audio->config().filters == 3);

  auto original_params = channel.parameters();
  auto loaded_params = audio->parameters();
  REQUIRE(original_params.size() == loaded_params.size());
  for (std::size_t i = 0; i < original_params.size(); ++i) {
    const auto a = original_params[i]->tensor.values();
    const auto b = loaded_params[i]->tensor.values();
    REQUIRE(a.size() == b.size());
    for (std::size_t v = 0; v < a.size(); ++v) CHECK(a[v] == b[v]);
  }
}
