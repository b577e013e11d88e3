#include "trimodal/video_channel.hpp"

#include <cmath>

#include "trimodal/errors.hpp"
#include "trimodal/image.hpp"
#include "trimodal/ops.hpp"

namespace trimodal {

namespace {

// Frozen backbone layout: three 3x3 conv layers (pad 1) with channel widths
// 16/32/64, max-pool 2 after the first two, global average pool at the end.
constexpr std::size_t kBackboneChannels[] = {16, 32, 64};
constexpr std::size_t kBackboneOutputDim = 64;

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Parameter clone_parameter(const Parameter& p) {
  return Parameter(p.name, p.tensor.detach(), p.frozen);
}

}  // namespace

void VideoChannelConfig::validate() const {
  if (input_size < 8) throw ParameterError("video config: input_size must be at least 8");
  if (head_hidden_dim == 0 || feature_dim == 0) {
    throw ParameterError("video config: sizes must be positive");
  }
  if (source == VideoSource::kFrozenBackbone && feature_dim != kBackboneOutputDim) {
    throw ParameterError("video config: the frozen backbone produces 64 features");
  }
}

std::size_t select_frame_index(std::size_t frame_count, bool training, Rng& rng) {
  if (frame_count == 0) throw ValidationError("no frames available for clip");
  if (training) return rng.uniform_index(frame_count);
  return frame_count / 2;  // deterministic middle frame for evaluation
}

const FrameImage& select_random_frame(const std::vector<FrameImage>& frames, bool training,
                                      Rng& rng) {
  return frames[select_frame_index(frames.size(), training, rng)];
}

VideoChannel::VideoChannel(VideoChannelConfig config, std::uint64_t init_seed)
    : config_(config) {
  config_.validate();
  if (config_.source == VideoSource::kFrozenBackbone) {
    Rng backbone_rng(config_.backbone_seed);
    std::size_t c_in = 3;
    for (std::size_t layer = 0; layer < 3; ++layer) {
      const std::size_t c_out = kBackboneChannels[layer];
      const double limit = glorot_limit(c_in * 9, c_out * 9);
      const std::string base = "video.backbone.conv" + std::to_string(layer + 1);
      backbone_.push_back(ConvLayer{
          Parameter(base + ".kernels",
                    Tensor::uniform({c_out, c_in, 3, 3}, -limit, limit, backbone_rng),
                    /*frozen=*/true),
          Parameter(base + ".bias", Tensor({c_out}), /*frozen=*/true),
      });
      c_in = c_out;
    }
  }
  Rng rng(init_seed);
  {
    const double limit = glorot_limit(config_.feature_dim, config_.head_hidden_dim);
    fc_weights_ = Parameter(
        "video.fc.weights",
        Tensor::uniform({config_.head_hidden_dim, config_.feature_dim}, -limit, limit, rng));
    fc_bias_ = Parameter("video.fc.bias", Tensor({config_.head_hidden_dim}));
  }
  {
    const double limit = glorot_limit(config_.head_hidden_dim, kTraitCount);
    head_weights_ = Parameter(
        "video.head.weights",
        Tensor::uniform({kTraitCount, config_.head_hidden_dim}, -limit, limit, rng));
    head_bias_ = Parameter("video.head.bias", Tensor({kTraitCount}));
  }
}

FeatureVector VideoChannel::backbone_features(const FrameImage& frame) const {
  if (config_.source != VideoSource::kFrozenBackbone) {
    throw ParameterError("backbone_features: channel is configured for precomputed features");
  }
  if (frame.height != config_.input_size || frame.width != config_.input_size) {
    throw DimensionError("backbone_features: expected " + std::to_string(config_.input_size) +
                         "x" + std::to_string(config_.input_size) + " frame");
  }
  NoGradGuard guard;
  Tensor h({3, frame.height, frame.width}, frame.pixels);
  for (std::size_t layer = 0; layer < backbone_.size(); ++layer) {
    h = relu(conv2d(h, backbone_[layer].kernels.tensor, backbone_[layer].bias.tensor,
                    /*stride=*/1, /*padding=*/1));
    if (layer + 1 < backbone_.size()) h = max_pool2d(h, 2);
  }
  // Global average pool over the spatial extent.
  h = global_avg_pool(reshape(h, {h.dim(0), h.dim(1) * h.dim(2)}));
  return FeatureVector{std::vector<double>(h.values().begin(), h.values().end())};
}

ChannelOutput VideoChannel::forward_features(const FeatureVector& features) {
  if (features.values.size() != config_.feature_dim) {
    throw DimensionError("video forward: feature length " +
                         std::to_string(features.values.size()) + " does not match F=" +
                         std::to_string(config_.feature_dim));
  }
  Tensor input({config_.feature_dim}, features.values);
  Tensor penultimate = relu(fully_connected(input, fc_weights_.tensor, fc_bias_.tensor));
  Tensor traits = sigmoid(fully_connected(penultimate, head_weights_.tensor, head_bias_.tensor));
  return {penultimate, traits};
}

const FeatureVector& VideoChannel::clip_features(const ClipData& clip, bool training, Rng& rng) {
  // Precomputed features take precedence; frame selection does not apply.
  if (clip.features) return *clip.features;
  if (clip.frame_paths.empty()) {
    throw ValidationError("clip " + clip.clip_id + " has neither frames nor features");
  }
  const std::size_t index = select_frame_index(clip.frame_paths.size(), training, rng);
  auto& cached = feature_cache_[clip.clip_id];
  if (cached.empty()) cached.resize(clip.frame_paths.size());
  if (cached[index].values.empty()) {
    cached[index] = backbone_features(read_ppm(clip.frame_paths[index]));
  }
  return cached[index];
}

ChannelOutput VideoChannel::forward_channel(const ClipData& clip, bool training, Rng& rng) {
  return forward_features(clip_features(clip, training, rng));
}

Tensor VideoChannel::forward(const ClipData& clip, bool training, Rng& rng) {
  return forward_channel(clip, training, rng).traits;
}

std::vector<Parameter*> VideoChannel::parameters() {
  std::vector<Parameter*> out;
  for (ConvLayer& layer : backbone_) {
    out.push_back(&layer.kernels);
    out.push_back(&layer.bias);
  }
  out.push_back(&fc_weights_);
  out.push_back(&fc_bias_);
  out.push_back(&head_weights_);
  out.push_back(&head_bias_);
  return out;
}

VideoChannel VideoChannel::clone() const {
  VideoChannel copy(config_, 0);
  copy.backbone_.clear();
  for (const ConvLayer& layer : backbone_) {
    copy.backbone_.push_back(
        ConvLayer{clone_parameter(layer.kernels), clone_parameter(layer.bias)});
  }
  copy.fc_weights_ = clone_parameter(fc_weights_);
  copy.fc_bias_ = clone_parameter(fc_bias_);
  copy.head_weights_ = clone_parameter(head_weights_);
  copy.head_bias_ = clone_parameter(head_bias_);
  copy.feature_cache_ = feature_cache_;
  return copy;
}

void VideoChannel::freeze_all() {
  for (Parameter* p : parameters()) p->set_frozen(true);
}

std::map<std::string, std::string> VideoChannel::config_map() const {
  return {
      {"video.input_size", std::to_string(config_.input_size)},
      {"video.backbone_seed", std::to_string(config_.backbone_seed)},
      {"video.head_hidden_dim", std::to_string(config_.head_hidden_dim)},
      {"video.source",
       config_.source == VideoSource::kFrozenBackbone ? "backbone" : "features"},
      {"video.feature_dim", std::to_string(config_.feature_dim)},
  };
}

VideoChannelConfig VideoChannel::config_from_map(const std::map<std::string, std::string>& map,
                                                 const std::string& prefix) {
  VideoChannelConfig config;
  auto find = [&](const std::string& key) -> const std::string& {
    auto it = map.find(prefix + key);
    if (it == map.end()) throw ValidationError("checkpoint missing config key " + prefix + key);
    return it->second;
  };
  config.input_size = std::stoull(find("input_size"));
  config.backbone_seed = std::stoull(find("backbone_seed"));
  config.head_hidden_dim = std::stoull(find("head_hidden_dim"));
  config.source =
      find("source") == "backbone" ? VideoSource::kFrozenBackbone : VideoSource::kPrecomputedFeatures;
  config.feature_dim = std::stoull(find("feature_dim"));
  return config;
}

}  // namespace trimodal
