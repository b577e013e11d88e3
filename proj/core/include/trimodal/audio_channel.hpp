#pragma once

#include <cstdint>
#include <vector>

#include "trimodal/clip.hpp"
#include "trimodal/model.hpp"

namespace trimodal {

struct AudioChannelConfig {
  std::size_t first_window = 200;  // 25 ms at 8 kHz
  std::size_t first_stride = 100;  // 12.5 ms
  std::size_t later_window = 8;
  std::size_t later_stride = 2;
  std::size_t filters = 512;
  std::size_t num_conv_layers = 4;
  std::size_t penultimate_dim = 64;

  void validate() const;
};

// Downsamples to 8 kHz. Integer ratios decimate exactly; other ratios use
// linear interpolation. Rates below 8 kHz are rejected.
AudioClip resample_to_8khz(const AudioClip& clip);

// Training-time volume augmentation: one draw alpha = 10^U(-1.5, 1.5) scales
// the whole clip.
AudioClip randomize_amplitude(const AudioClip& clip, Rng& rng);

// Row 0 is the raw waveform, row 1 the elementwise square.
Tensor dual_channel(const AudioClip& clip);

// Raw-waveform audio channel: four 1-D conv layers with ReLU, global average
// pooling of every layer's output, a learned softmax blend of the pooled
// vectors, then FC -> penultimate and FC -> sigmoid trait scores.
class AudioChannel final : public TraitModel {
 public:
  AudioChannel(AudioChannelConfig config, std::uint64_t init_seed);

  ChannelOutput forward_channel(const AudioClip& clip, bool training, Rng& rng);
  ChannelOutput forward_tensor(const Tensor& input, bool training);  // [2 x L]

  std::string kind() const override { return "audio"; }
  Tensor forward(const ClipData& clip, bool training, Rng& rng) override;
  std::vector<Parameter*> parameters() override;
  std::map<std::string, std::string> config_map() const override;

  const AudioChannelConfig& config() const { return config_; }
  Tensor blend_coefficients() const;  // softmax of the layer blend logits

  AudioChannel clone() const;
  void freeze_all();

  // Smallest input length the conv cascade accepts.
  static std::size_t min_input_length(const AudioChannelConfig& config);
  // Per-layer output lengths for a given input length.
  static std::vector<std::size_t> layer_lengths(const AudioChannelConfig& config,
                                                std::size_t input_length);

  static AudioChannelConfig config_from_map(const std::map<std::string, std::string>& map,
                                            const std::string& prefix);

 private:
  struct ConvLayer {
    Parameter kernels;
    Parameter bias;
  };

  AudioChannelConfig config_;
  std::vector<ConvLayer> conv_;
  Parameter blend_logits_;
  Parameter fc_weights_, fc_bias_;
  Parameter head_weights_, head_bias_;
};

}  // namespace trimodal
