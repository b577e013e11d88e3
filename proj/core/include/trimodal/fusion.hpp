#pragma once

#include <array>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "trimodal/audio_channel.hpp"
#include "trimodal/text_channel.hpp"
#include "trimodal/video_channel.hpp"

namespace trimodal {

inline constexpr std::size_t kModalityCount = 3;  // audio, text, video
inline constexpr std::array<const char*, 3> kModalityNames = {"audio", "text", "video"};

// Per-trait, per-modality decision-level weights. Each trait row sums to 1;
// entries may be negative.
struct FusionWeights {
  std::array<std::array<double, kModalityCount>, kTraitCount> w{};

  void validate() const;  // rows sum to 1 within 1e-9
  void save(const std::filesystem::path& path) const;
  static FusionWeights load(const std::filesystem::path& path);
};

// Ensemble prediction: per trait i, sum_j w[i][j] * preds[j][i], clamped to
// [0, 1]. preds holds one trait vector per modality (audio, text, video).
TraitVector dlf_predict(const FusionWeights& weights,
                        const std::array<TraitVector, kModalityCount>& preds);

struct PredictionRecord {
  std::string clip_id;
  std::array<TraitVector, kModalityCount> preds;  // per modality
  TraitVector labels{};
};
using PredictionSet = std::vector<PredictionRecord>;

// Mean absolute residual of the affine combination for one trait.
double dlf_trait_objective(const PredictionSet& devset, std::size_t trait,
                           const std::array<double, kModalityCount>& w);

struct DlfFitResult {
  FusionWeights weights;
  TraitVector objective{};            // achieved mean absolute error per trait
  std::array<bool, kTraitCount> degenerate{};  // modalities indistinguishable
};

// Least-absolute-deviations fit of the per-trait weights under the sum-to-1
// constraint: projected subgradient descent, step 0.1/sqrt(t) for 10^4
// iterations from the uniform start, tracking the best iterate seen. The
// three single-modality corners are included as candidates, so the returned
// objective never exceeds any of them.
DlfFitResult dlf_fit(const PredictionSet& devset);

// Evaluation-mode channel predictions for every clip.
PredictionSet collect_predictions(AudioChannel& audio, TextChannel& text, VideoChannel& video,
                                  const std::vector<ClipData>& clips);

enum class FusionMode {
  kLimitedBackprop,  // NNLB: channels frozen, only the added head trains
  kFullBackprop,     // NNFB: audio/text (and the video head) train jointly
};

std::string fusion_mode_name(FusionMode mode);

// Channels truncated at their penultimate layers, concatenated
// (audio | text | video), with two added FC layers on top.
class FusedNetwork final : public TraitModel {
 public:
  FusedNetwork(const AudioChannel& audio, const TextChannel& text, const VideoChannel& video,
               FusionMode mode, std::size_t hidden_dim, std::uint64_t head_seed);

  std::string kind() const override;
  Tensor forward(const ClipData& clip, bool training, Rng& rng) override;
  std::vector<Parameter*> parameters() override;
  std::map<std::string, std::string> config_map() const override;

  FusionMode mode() const { return mode_; }
  std::size_t concat_dim() const { return concat_dim_; }
  std::size_t hidden_dim() const { return hidden_dim_; }

  AudioChannel& audio() { return audio_; }
  TextChannel& text() { return text_; }
  VideoChannel& video() { return video_; }

 private:
  AudioChannel audio_;
  TextChannel text_;
  VideoChannel video_;
  FusionMode mode_;
  std::size_t hidden_dim_;
  std::size_t concat_dim_;
  Parameter fc_weights_, fc_bias_;
  Parameter head_weights_, head_bias_;
};

// build_fused wires fully trained channels into a fused network with fresh
// head layers and mode-appropriate freezing.
FusedNetwork build_fused(const AudioChannel& audio, const TextChannel& text,
                         const VideoChannel& video, FusionMode mode, std::size_t hidden_dim,
                         std::uint64_t head_seed);

}  // namespace trimodal
