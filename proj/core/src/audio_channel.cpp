#include "trimodal/audio_channel.hpp"

#include <cmath>
#include <string>

#include "trimodal/errors.hpp"
#include "trimodal/ops.hpp"

namespace trimodal {

namespace {

constexpr int kTargetRate = 8000;

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Parameter clone_parameter(const Parameter& p) {
  return Parameter(p.name, p.tensor.detach(), p.frozen);
}

}  // namespace

void AudioChannelConfig::validate() const {
  if (first_window == 0 || first_stride == 0 || later_window == 0 || later_stride == 0 ||
      filters == 0 || penultimate_dim == 0) {
    throw ParameterError("audio config: all sizes must be positive");
  }
  if (num_conv_layers != 4) {
    throw ParameterError("audio config: the conv stack has exactly four layers");
  }
}

AudioClip resample_to_8khz(const AudioClip& clip) {
  if (clip.sample_rate <= 0) throw ParameterError("resample: sample rate must be positive");
  if (clip.samples.empty()) throw ParameterError("resample: empty clip");
  if (clip.sample_rate < kTargetRate) {
    throw UnsupportedFormatError("resample: upsampling from " +
                                 std::to_string(clip.sample_rate) + " Hz is unsupported");
  }
  if (clip.sample_rate == kTargetRate) return clip;

  const std::size_t n_in = clip.samples.size();
  const std::size_t n_out = std::max<std::size_t>(
      1, n_in * static_cast<std::size_t>(kTargetRate) / static_cast<std::size_t>(clip.sample_rate));
  const double step = static_cast<double>(clip.sample_rate) / static_cast<double>(kTargetRate);

  AudioClip out;
  out.sample_rate = kTargetRate;
  out.samples.resize(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    const double pos = static_cast<double>(i) * step;
    std::size_t i0 = static_cast<std::size_t>(pos);
    if (i0 >= n_in - 1) i0 = n_in - 1;
    const std::size_t i1 = std::min(i0 + 1, n_in - 1);
    const double frac = pos - static_cast<double>(i0);
    // x0 + f*(x1-x0) keeps constant signals exactly constant.
    out.samples[i] = clip.samples[i0] + frac * (clip.samples[i1] - clip.samples[i0]);
  }
  return out;
}

AudioClip randomize_amplitude(const AudioClip& clip, Rng& rng) {
  const double exponent = rng.uniform(-1.5, 1.5);
  const double alpha = std::pow(10.0, exponent);
  AudioClip out;
  out.sample_rate = clip.sample_rate;
  out.samples.resize(clip.samples.size());
  for (std::size_t i = 0; i < clip.samples.size(); ++i) out.samples[i] = alpha * clip.samples[i];
  return out;
}

Tensor dual_channel(const AudioClip& clip) {
  const std::size_t n = clip.samples.size();
  if (n == 0) throw ParameterError("dual_channel: empty clip");
  std::vector<double> values(2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    values[i] = clip.samples[i];
    values[n + i] = clip.samples[i] * clip.samples[i];
  }
  return Tensor({2, n}, std::move(values));
}

AudioChannel::AudioChannel(AudioChannelConfig config, std::uint64_t init_seed)
    : config_(config) {
  config_.validate();
  Rng rng(init_seed);
  const std::size_t f = config_.filters;
  for (std::size_t layer = 0; layer < config_.num_conv_layers; ++layer) {
    const std::size_t c_in = layer == 0 ? 2 : f;
    const std::size_t window = layer == 0 ? config_.first_window : config_.later_window;
    const double limit = glorot_limit(c_in * window, f * window);
    const std::string base = "audio.conv" + std::to_string(layer + 1);
    conv_.push_back(ConvLayer{
        Parameter(base + ".kernels", Tensor::uniform({f, c_in, window}, -limit, limit, rng)),
        Parameter(base + ".bias", Tensor({f})),
    });
  }
  blend_logits_ = Parameter("audio.blend.logits", Tensor({config_.num_conv_layers}));
  {
    const double limit = glorot_limit(f, config_.penultimate_dim);
    fc_weights_ = Parameter("audio.fc.weights",
                            Tensor::uniform({config_.penultimate_dim, f}, -limit, limit, rng));
    fc_bias_ = Parameter("audio.fc.bias", Tensor({config_.penultimate_dim}));
  }
  {
    const double limit = glorot_limit(config_.penultimate_dim, kTraitCount);
    head_weights_ = Parameter(
        "audio.head.weights",
        Tensor::uniform({kTraitCount, config_.penultimate_dim}, -limit, limit, rng));
    head_bias_ = Parameter("audio.head.bias", Tensor({kTraitCount}));
  }
}

std::size_t AudioChannel::min_input_length(const AudioChannelConfig& config) {
  // Invert floor((L - W)/S) + 1 >= required layer by layer from the top.
  std::size_t required = 1;
  for (std::size_t layer = config.num_conv_layers; layer-- > 0;) {
    const std::size_t window = layer == 0 ? config.first_window : config.later_window;
    const std::size_t stride = layer == 0 ? config.first_stride : config.later_stride;
    required = (required - 1) * stride + window;
  }
  return required;
}

std::vector<std::size_t> AudioChannel::layer_lengths(const AudioChannelConfig& config,
                                                     std::size_t input_length) {
  std::vector<std::size_t> lengths;
  std::size_t length = input_length;
  for (std::size_t layer = 0; layer < config.num_conv_layers; ++layer) {
    const std::size_t window = layer == 0 ? config.first_window : config.later_window;
    const std::size_t stride = layer == 0 ? config.first_stride : config.later_stride;
    length = conv1d_output_length(length, window, stride);
    lengths.push_back(length);
  }
  return lengths;
}

ChannelOutput AudioChannel::forward_tensor(const Tensor& input, bool training) {
  (void)training;  // the audio stack has no train-only layers past preprocessing
  if (!input.defined() || input.rank() != 2 || input.dim(0) != 2) {
    throw DimensionError("audio forward: input must be [2 x L]");
  }
  const std::size_t min_len = min_input_length(config_);
  if (input.dim(1) < min_len) throw InputTooShortError(input.dim(1), min_len);

  std::vector<Tensor> pooled;
  Tensor h = input;
  for (std::size_t layer = 0; layer < conv_.size(); ++layer) {
    const std::size_t stride = layer == 0 ? config_.first_stride : config_.later_stride;
    h = relu(conv1d(h, conv_[layer].kernels.tensor, conv_[layer].bias.tensor, stride));
    pooled.push_back(global_avg_pool(h));
  }
  Tensor blended = weighted_sum(softmax(blend_logits_.tensor), pooled);
  Tensor penultimate = relu(fully_connected(blended, fc_weights_.tensor, fc_bias_.tensor));
  Tensor traits = sigmoid(fully_connected(penultimate, head_weights_.tensor, head_bias_.tensor));
  return {penultimate, traits};
}

ChannelOutput AudioChannel::forward_channel(const AudioClip& clip, bool training, Rng& rng) {
  if (clip.sample_rate != kTargetRate) {
    throw ValidationError("audio forward: clip must be resampled to 8 kHz first");
  }
  if (training) {
    return forward_tensor(dual_channel(randomize_amplitude(clip, rng)), training);
  }
  return forward_tensor(dual_channel(clip), training);
}

Tensor AudioChannel::forward(const ClipData& clip, bool training, Rng& rng) {
  return forward_channel(clip.audio, training, rng).traits;
}

std::vector<Parameter*> AudioChannel::parameters() {
  std::vector<Parameter*> out;
  for (ConvLayer& layer : conv_) {
    out.push_back(&layer.kernels);
    out.push_back(&layer.bias);
  }
  out.push_back(&blend_logits_);
  out.push_back(&fc_weights_);
  out.push_back(&fc_bias_);
  out.push_back(&head_weights_);
  out.push_back(&head_bias_);
  return out;
}

Tensor AudioChannel::blend_coefficients() const {
  NoGradGuard guard;
  return softmax(blend_logits_.tensor);
}

AudioChannel AudioChannel::clone() const {
  AudioChannel copy(config_, 0);
  copy.conv_.clear();
  for (const ConvLayer& layer : conv_) {
    copy.conv_.push_back(ConvLayer{clone_parameter(layer.kernels), clone_parameter(layer.bias)});
  }
  copy.blend_logits_ = clone_parameter(blend_logits_);
  copy.fc_weights_ = clone_parameter(fc_weights_);
  copy.fc_bias_ = clone_parameter(fc_bias_);
  copy.head_weights_ = clone_parameter(head_weights_);
  copy.head_bias_ = clone_parameter(head_bias_);
  return copy;
}

void AudioChannel::freeze_all() {
  for (Parameter* p : parameters()) p->set_frozen(true);
}

std::map<std::string, std::string> AudioChannel::config_map() const {
  return {
      {"audio.first_window", std::to_string(config_.first_window)},
      {"audio.first_stride", std::to_string(config_.first_stride)},
      {"audio.later_window", std::to_string(config_.later_window)},
      {"audio.later_stride", std::to_string(config_.later_stride)},
      {"audio.filters", std::to_string(config_.filters)},
      {"audio.penultimate_dim", std::to_string(config_.penultimate_dim)},
  };
}

AudioChannelConfig AudioChannel::config_from_map(const std::map<std::string, std::string>& map,
                                                 const std::string& prefix) {
  AudioChannelConfig config;
  auto fetch = [&](const std::string& key, std::size_t& field) {
    auto it = map.find(prefix + key);
    if (it == map.end()) throw ValidationError("checkpoint missing config key " + prefix + key);
    field = static_cast<std::size_t>(std::stoull(it->second));
  };
  fetch("first_window", config.first_window);
  fetch("first_stride", config.first_stride);
  fetch("later_window", config.later_window);
  fetch("later_stride", config.later_stride);
  fetch("filters", config.filters);
  fetch("penultimate_dim", config.penultimate_dim);
  return config;
}

}  // namespace trimodal
