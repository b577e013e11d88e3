#include <benchmark/benchmark.h>

#include "trimodal/audio_channel.hpp"
#include "trimodal/video_channel.hpp"

namespace {

using namespace trimodal;

AudioClip make_clip(std::size_t seconds) {
  Rng rng(2);
  AudioClip clip;
  clip.sample_rate = 8000;
  clip.samples.resize(seconds * 8000);
  for (double& s : clip.samples) s = rng.uniform(-0.8, 0.8);
  return clip;
}

void BM_AudioForward(benchmark::State& state) {
  AudioChannelConfig config;
  config.filters = static_cast<std::size_t>(state.range(0));
  AudioChannel channel(config, 1);
  const AudioClip clip = make_clip(2);
  Rng rng(3);
  NoGradGuard guard;
  for (auto _ : state) {
    ChannelOutput out = channel.forward_channel(clip, false, rng);
    benchmark::DoNotOptimize(out.traits.values().data());
  }
}
BENCHMARK(BM_AudioForward)->Arg(48)->Arg(512)->Unit(benchmark::kMillisecond);

void BM_Resample(benchmark::State& state) {
  Rng rng(4);
  AudioClip clip;
  clip.sample_rate = 44100;
  clip.samples.resize(44100);
  for (double& s : clip.samples) s = rng.uniform(-0.8, 0.8);
  for (auto _ : state) {
    AudioClip out = resample_to_8khz(clip);
    benchmark::DoNotOptimize(out.samples.data());
  }
}
BENCHMARK(BM_Resample);

void BM_BackboneFeatures(benchmark::State& state) {
  VideoChannel channel(VideoChannelConfig{}, 1);
  Rng rng(5);
  FrameImage frame;
  frame.height = frame.width = 64;
  frame.pixels.resize(3 * 64 * 64);
  for (double& p : frame.pixels) p = rng.uniform(0.0, 1.0);
  for (auto _ : state) {
    FeatureVector features = channel.backbone_features(frame);
    benchmark::DoNotOptimize(features.values.data());
  }
}
BENCHMARK(BM_BackboneFeatures)->Unit(benchmark::kMillisecond);

}  // namespace
