#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cstring>
#include <filesystem>

#include "doctest.h"
#include "trimodal/errors.hpp"
#include "trimodal/gradcheck.hpp"
#include "trimodal/image.hpp"
#include "trimodal/ops.hpp"
#include "trimodal/video_channel.hpp"

using namespace trimodal;

namespace {

FrameImage random_frame(std::size_t size, Rng& rng) {
  FrameImage frame;
  frame.height = frame.width = size;
  frame.pixels.resize(3 * size * size);
  for (double& p : frame.pixels) p = rng.uniform(0.0, 1.0);
  return frame;
}

std::vector<double> param_bytes(VideoChannel& channel, const std::string& prefix) {
  std::vector<double> out;
  for (Parameter* p : channel.parameters()) {
    if (p->name.rfind(prefix, 0) == 0) {
      out.insert(out.end(), p->tensor.values().begin(), p->tensor.values().end());
    }
  }
  return out;
}

}  // namespace

TEST_CASE("frame selection: single frame and middle rule") {
  Rng rng(1);
  std::vector<FrameImage> one = {random_frame(8, rng)};
  CHECK(&select_random_frame(one, false, rng) == &one[0]);
  CHECK(&select_random_frame(one, true, rng) == &one[0]);

  CHECK(select_frame_index(5, false, rng) == 2);  // evaluation picks the middle
  CHECK(select_frame_index(4, false, rng) == 2);
  CHECK(select_frame_index(1, false, rng) == 0);
}

TEST_CASE("frame selection rejects empty lists") {
  Rng rng(1);
  std::vector<FrameImage> none;
  CHECK_THROWS_AS(select_random_frame(none, true, rng), ValidationError);
}

TEST_CASE("training-mode frame choice is close to uniform") {
  Rng rng(7);
  std::array<std::size_t, 4> counts{};
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) counts[select_frame_index(4, true, rng)]++;
  for (std::size_t c : counts) {
    const double frequency = static_cast<double>(c) / trials;
    CHECK(frequency > 0.23);
    CHECK(frequency < 0.27);
  }
}

TEST_CASE("backbone features are deterministic and frozen") {
  VideoChannelConfig config;
  config.input_size = 16;
  VideoChannel a(config, 1);
  VideoChannel b(config, 99);  // init seed only touches the head
  Rng rng(3);
  const FrameImage frame = random_frame(16, rng);

  const FeatureVector fa = a.backbone_features(frame);
  const FeatureVector fb = b.backbone_features(frame);
  REQUIRE(fa.values.size() == 64);
  CHECK(std::memcmp(fa.values.data(), fb.values.data(), fa.values.size() * sizeof(double)) == 0);

  for (Parameter* p : a.parameters()) {
    if (p->name.rfind("video.backbone.", 0) == 0) CHECK(p->frozen);
  }
}

TEST_CASE("zero image with zero biases gives zero features through relu conv stack") {
  VideoChannelConfig config;
  config.input_size = 16;
  VideoChannel channel(config, 1);
  FrameImage frame;
  frame.height = frame.width = 16;
  frame.pixels.assign(3 * 16 * 16, 0.0);
  const FeatureVector features = channel.backbone_features(frame);
  for (double v : features.values) CHECK(v == 0.0);  // conv biases init to zero
}

TEST_CASE("wrong frame size is a dimension error") {
  VideoChannelConfig config;
  config.input_size = 16;
  VideoChannel channel(config, 1);
  Rng rng(5);
  const FrameImage frame = random_frame(8, rng);
  CHECK_THROWS_AS(channel.backbone_features(frame), DimensionError);
}

TEST_CASE("zero features and zero head give 0.5 traits with a 512 penultimate") {
  VideoChannel channel(VideoChannelConfig{}, 1);
  for (Parameter* p : channel.parameters()) {
    if (p->name.rfind("video.backbone.", 0) == 0) continue;
    for (double& v : p->tensor.values()) v = 0.0;
  }
  FeatureVector features;
  features.values.assign(64, 0.0);
  const ChannelOutput out = channel.forward_features(features);
  CHECK(out.penultimate.size() == 512);
  for (std::size_t i = 0; i < 5; ++i) CHECK(out.traits[i] == doctest::Approx(0.5));
}

TEST_CASE("feature length mismatch is rejected") {
  VideoChannel channel(VideoChannelConfig{}, 1);
  FeatureVector features;
  features.values.assign(32, 0.0);
  CHECK_THROWS_AS(channel.forward_features(features), DimensionError);
}

TEST_CASE("head gradient matches finite differences") {
  VideoChannelConfig config;
  config.head_hidden_dim = 12;
  VideoChannel channel(config, 31);
  Rng jitter(6);
  for (Parameter* p : channel.parameters()) {
    if (p->frozen) continue;
    for (double& v : p->tensor.values()) v += jitter.uniform(-0.05, 0.05);
  }
  Rng rng(8);
  FeatureVector features;
  features.values.resize(64);
  for (double& v : features.values) v = rng.uniform(-1.0, 1.0);
  Tensor label = Tensor::uniform({5}, 0.1, 0.9, rng);
  auto loss_fn = [&] {
    return mse_over_traits(channel.forward_features(features).traits, label);
  };
  const GradCheckReport report =
      finite_diff_check_params(loss_fn, trainable_parameters(channel.parameters()));
  CHECK(report.max_rel_error < 1e-4);
}

TEST_CASE("backbone parameters survive head mutations bit-identically") {
  VideoChannelConfig config;
  config.input_size = 16;
  VideoChannel channel(config, 1);
  const std::vector<double> before = param_bytes(channel, "video.backbone.");
  for (Parameter* p : channel.parameters()) {
    if (p->frozen) continue;
    for (double& v : p->tensor.values()) v += 0.5;
  }
  const std::vector<double> after = param_bytes(channel, "video.backbone.");
  CHECK(std::memcmp(before.data(), after.data(), before.size() * sizeof(double)) == 0);
}

TEST_CASE("clip forward goes through frames on disk, middle frame in eval") {
  const auto dir = std::filesystem::temp_directory_path() / "trimodal_video_test";
  std::filesystem::create_directories(dir);
  VideoChannelConfig config;
  config.input_size = 16;
  VideoChannel channel(config, 3);

  Rng rng(9);
  ClipData clip;
  clip.clip_id = "vtest";
  for (int i = 0; i < 3; ++i) {
    const FrameImage frame = random_frame(16, rng);
    const auto path = dir / ("frame" + std::to_string(i) + ".ppm");
    write_ppm(path, frame);
    clip.frame_paths.push_back(path.string());
  }

  Rng eval_rng(0);
  const Tensor a = channel.forward(clip, false, eval_rng);
  const Tensor b = channel.forward(clip, false, eval_rng);
  for (std::size_t i = 0; i < 5; ++i) CHECK(a[i] == b[i]);

  const FrameImage middle = read_ppm(clip.frame_paths[1]);
  const ChannelOutput direct = channel.forward_features(channel.backbone_features(middle));
  for (std::size_t i = 0; i < 5; ++i) CHECK(a[i] == direct.traits[i]);

  std::filesystem::remove_all(dir);
}

TEST_CASE("precomputed features bypass frames entirely") {
  VideoChannel channel(VideoChannelConfig{}, 4);
  Rng rng(10);
  ClipData clip;
  clip.clip_id = "feat";
  clip.features = FeatureVector{};
  clip.features->values.resize(64);
  for (double& v : clip.features->values) v = rng.uniform(-1.0, 1.0);
  Rng eval_rng(0);
  const Tensor traits = channel.forward(clip, false, eval_rng);
  for (std::size_t i = 0; i < 5; ++i) {
    CHECK(traits[i] > 0.0);
    CHECK(traits[i] < 1.0);
  }
}
