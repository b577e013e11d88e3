#pragma once

#include <cstdint>
#include <unordered_map>
#include <vector>

#include "trimodal/clip.hpp"
#include "trimodal/model.hpp"

namespace trimodal {

enum class VideoSource {
  kFrozenBackbone,        // random-initialized frozen conv stack (default)
  kPrecomputedFeatures,   // feature vectors supplied by the dataset
};

struct VideoChannelConfig {
  std::size_t input_size = 64;  // frames are input_size x input_size
  std::uint64_t backbone_seed = 2402;
  std::size_t head_hidden_dim = 512;
  VideoSource source = VideoSource::kFrozenBackbone;
  std::size_t feature_dim = 64;  // F; fixed by the backbone when one is used

  void validate() const;
};

// Uniform frame choice during training; deterministic middle frame during
// evaluation.
const FrameImage& select_random_frame(const std::vector<FrameImage>& frames, bool training,
                                      Rng& rng);
std::size_t select_frame_index(std::size_t frame_count, bool training, Rng& rng);

// Appearance channel: a frozen convolutional backbone stands in for a large
// pretrained feature extractor, followed by the only two trainable layers,
// FC -> penultimate (ReLU) and FC -> sigmoid traits.
class VideoChannel final : public TraitModel {
 public:
  VideoChannel(VideoChannelConfig config, std::uint64_t init_seed);

  // Deterministic frozen feature extraction; backbone parameters never change.
  FeatureVector backbone_features(const FrameImage& frame) const;

  ChannelOutput forward_features(const FeatureVector& features);
  ChannelOutput forward_channel(const ClipData& clip, bool training, Rng& rng);

  std::string kind() const override { return "video"; }
  Tensor forward(const ClipData& clip, bool training, Rng& rng) override;
  std::vector<Parameter*> parameters() override;
  std::map<std::string, std::string> config_map() const override;

  const VideoChannelConfig& config() const { return config_; }

  VideoChannel clone() const;
  void freeze_all();

  static VideoChannelConfig config_from_map(const std::map<std::string, std::string>& map,
                                            const std::string& prefix);

 private:
  const FeatureVector& clip_features(const ClipData& clip, bool training, Rng& rng);

  VideoChannelConfig config_;
  struct ConvLayer {
    Parameter kernels;
    Parameter bias;
  };
  std::vector<ConvLayer> backbone_;  // frozen
  Parameter fc_weights_, fc_bias_;
  Parameter head_weights_, head_bias_;
  // Frame features are deterministic per (clip, frame), so they are computed
  // once and reused across epochs.
  std::unordered_map<std::string, std::vector<FeatureVector>> feature_cache_;
};

}  // namespace trimodal
