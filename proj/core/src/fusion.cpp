#include "trimodal/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "trimodal/errors.hpp"
#include "trimodal/ops.hpp"

namespace trimodal {

namespace {

constexpr double kRowSumTolerance = 1e-9;
constexpr std::size_t kSubgradientIterations = 10000;

double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

}  // namespace

void FusionWeights::validate() const {
  for (std::size_t i = 0; i < kTraitCount; ++i) {
    const double row_sum = w[i][0] + w[i][1] + w[i][2];
    if (std::abs(row_sum - 1.0) > kRowSumTolerance) {
      throw ValidationError(std::string("fusion weights: trait ") + kTraitNames[i] +
                            " row sums to " + std::to_string(row_sum) + ", expected 1");
    }
  }
}

void FusionWeights::save(const std::filesystem::path& path) const {
  validate();
  std::ofstream out(path);
  if (!out) throw IoError("cannot write fusion weights to " + path.string());
  char line[128];
  for (std::size_t i = 0; i < kTraitCount; ++i) {
    std::snprintf(line, sizeof line, "%c %.17g %.17g %.17g\n", kTraitNames[i], w[i][0], w[i][1],
                  w[i][2]);
    out << line;
  }
}

FusionWeights FusionWeights::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open fusion weights file " + path.string());
  FusionWeights weights;
  std::string line;
  for (std::size_t i = 0; i < kTraitCount; ++i) {
    if (!std::getline(in, line)) {
      throw ParseError("fusion weights file ends early", i + 1);
    }
    std::istringstream row(line);
    char trait = '\0';
    if (!(row >> trait >> weights.w[i][0] >> weights.w[i][1] >> weights.w[i][2]) ||
        trait != kTraitNames[i]) {
      throw ParseError("expected 'trait w_audio w_text w_video' with trait order E A C N O",
                       i + 1);
    }
  }
  weights.validate();
  return weights;
}

TraitVector dlf_predict(const FusionWeights& weights,
                        const std::array<TraitVector, kModalityCount>& preds) {
  weights.validate();
  TraitVector out{};
  for (std::size_t i = 0; i < kTraitCount; ++i) {
    double v = 0.0;
    for (std::size_t j = 0; j < kModalityCount; ++j) v += weights.w[i][j] * preds[j][i];
    out[i] = std::clamp(v, 0.0, 1.0);
  }
  return out;
}

double dlf_trait_objective(const PredictionSet& devset, std::size_t trait,
                           const std::array<double, kModalityCount>& w) {
  if (devset.empty()) throw ValidationError("dlf objective: empty devset");
  double acc = 0.0;
  for (const PredictionRecord& record : devset) {
    const double combined = w[0] * record.preds[0][trait] + w[1] * record.preds[1][trait] +
                            w[2] * record.preds[2][trait];
    acc += std::abs(combined - record.labels[trait]);
  }
  return acc / static_cast<double>(devset.size());
}

DlfFitResult dlf_fit(const PredictionSet& devset) {
  if (devset.empty()) throw ValidationError("dlf_fit: empty devset");

  DlfFitResult result;
  for (std::size_t trait = 0; trait < kTraitCount; ++trait) {
    bool degenerate = true;
    for (const PredictionRecord& record : devset) {
      const double a = record.preds[0][trait];
      if (std::abs(record.preds[1][trait] - a) > 1e-12 ||
          std::abs(record.preds[2][trait] - a) > 1e-12) {
        degenerate = false;
        break;
      }
    }
    const std::array<double, 3> uniform = {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0};
    if (degenerate) {
      // Any sum-to-1 row is optimal when the modalities agree everywhere.
      result.degenerate[trait] = true;
      result.weights.w[trait] = uniform;
      result.objective[trait] = dlf_trait_objective(devset, trait, uniform);
      continue;
    }

    std::array<double, 3> w = uniform;
    std::array<double, 3> best = w;
    double best_obj = dlf_trait_objective(devset, trait, w);
    // The corners are feasible points; seeding the best-so-far with them
    // guarantees the fit never loses to a single modality.
    for (std::size_t j = 0; j < kModalityCount; ++j) {
      std::array<double, 3> corner{};
      corner[j] = 1.0;
      const double obj = dlf_trait_objective(devset, trait, corner);
      if (obj < best_obj) {
        best_obj = obj;
        best = corner;
      }
    }

    const double inv_n = 1.0 / static_cast<double>(devset.size());
    for (std::size_t t = 1; t <= kSubgradientIterations; ++t) {
      std::array<double, 3> grad{};
      for (const PredictionRecord& record : devset) {
        const double residual = w[0] * record.preds[0][trait] + w[1] * record.preds[1][trait] +
                                w[2] * record.preds[2][trait] - record.labels[trait];
        if (residual == 0.0) continue;
        const double sign = residual > 0.0 ? inv_n : -inv_n;
        grad[0] += sign * record.preds[0][trait];
        grad[1] += sign * record.preds[1][trait];
        grad[2] += sign * record.preds[2][trait];
      }
      const double step = 0.1 / std::sqrt(static_cast<double>(t));
      for (std::size_t j = 0; j < 3; ++j) w[j] -= step * grad[j];
      // Project back onto the sum-to-1 hyperplane.
      const double shift = (1.0 - (w[0] + w[1] + w[2])) / 3.0;
      for (std::size_t j = 0; j < 3; ++j) w[j] += shift;

      const double obj = dlf_trait_objective(devset, trait, w);
      if (obj < best_obj) {
        best_obj = obj;
        best = w;
      }
    }

    // Pattern-search polish inside the sum-to-1 plane. The objective is
    // convex piecewise-linear, so shrinking coordinate moves from the best
    // subgradient iterate reach the global minimum to solver precision.
    const std::array<std::array<double, 3>, 3> directions = {
        {{1.0, -1.0, 0.0}, {0.0, 1.0, -1.0}, {1.0, 0.0, -1.0}}};
    for (double step = 0.05; step > 1e-6; step *= 0.5) {
      bool improved = true;
      while (improved) {
        improved = false;
        for (const auto& direction : directions) {
          for (double sign : {1.0, -1.0}) {
            std::array<double, 3> candidate = best;
            for (std::size_t j = 0; j < 3; ++j) candidate[j] += sign * step * direction[j];
            const double obj = dlf_trait_objective(devset, trait, candidate);
            if (obj < best_obj) {
              best_obj = obj;
              best = candidate;
              improved = true;
            }
          }
        }
      }
    }

    result.weights.w[trait] = best;
    result.objective[trait] = best_obj;
  }
  return result;
}

PredictionSet collect_predictions(AudioChannel& audio, TextChannel& text, VideoChannel& video,
                                  const std::vector<ClipData>& clips) {
  PredictionSet out;
  out.reserve(clips.size());
  NoGradGuard guard;
  Rng rng(0);  // evaluation paths draw nothing
  for (const ClipData& clip : clips) {
    PredictionRecord record;
    record.clip_id = clip.clip_id;
    record.labels = clip.labels;
    const Tensor a = audio.forward(clip, false, rng);
    const Tensor t = text.forward(clip, false, rng);
    const Tensor v = video.forward(clip, false, rng);
    for (std::size_t i = 0; i < kTraitCount; ++i) {
      record.preds[0][i] = a[i];
      record.preds[1][i] = t[i];
      record.preds[2][i] = v[i];
    }
    out.push_back(std::move(record));
  }
  return out;
}

std::string fusion_mode_name(FusionMode mode) {
  return mode == FusionMode::kLimitedBackprop ? "nnlb" : "nnfb";
}

FusedNetwork::FusedNetwork(const AudioChannel& audio, const TextChannel& text,
                           const VideoChannel& video, FusionMode mode, std::size_t hidden_dim,
                           std::uint64_t head_seed)
    : audio_(audio.clone()),
      text_(text.clone()),
      video_(video.clone()),
      mode_(mode),
      hidden_dim_(hidden_dim) {
  if (hidden_dim_ == 0) throw ParameterError("fused network: hidden_dim must be positive");
  concat_dim_ = audio_.config().penultimate_dim + text_.config().penultimate_dim +
                video_.config().head_hidden_dim;
  if (mode_ == FusionMode::kLimitedBackprop) {
    audio_.freeze_all();
    text_.freeze_all();
    video_.freeze_all();
  }
  Rng rng(head_seed);
  {
    const double limit = glorot_limit(concat_dim_, hidden_dim_);
    fc_weights_ =
        Parameter("fused.fc.weights", Tensor::uniform({hidden_dim_, concat_dim_}, -limit, limit, rng));
    fc_bias_ = Parameter("fused.fc.bias", Tensor({hidden_dim_}));
  }
  {
    const double limit = glorot_limit(hidden_dim_, kTraitCount);
    head_weights_ = Parameter("fused.head.weights",
                              Tensor::uniform({kTraitCount, hidden_dim_}, -limit, limit, rng));
    head_bias_ = Parameter("fused.head.bias", Tensor({kTraitCount}));
  }
}

std::string FusedNetwork::kind() const { return fusion_mode_name(mode_); }

Tensor FusedNetwork::forward(const ClipData& clip, bool training, Rng& rng) {
  ChannelOutput audio_out = audio_.forward_channel(clip.audio, training, rng);
  ChannelOutput text_out = text_.forward_channel(clip.transcript, training, rng);
  ChannelOutput video_out = video_.forward_channel(clip, training, rng);

  Tensor a = audio_out.penultimate;
  Tensor t = text_out.penultimate;
  Tensor v = video_out.penultimate;
  if (mode_ == FusionMode::kLimitedBackprop) {
    // Frozen channels: cut the graph at the penultimate boundary.
    a = a.detach();
    t = t.detach();
    v = v.detach();
  }
  Tensor joint = concat({a, t, v});
  Tensor hidden = relu(fully_connected(joint, fc_weights_.tensor, fc_bias_.tensor));
  return sigmoid(fully_connected(hidden, head_weights_.tensor, head_bias_.tensor));
}

std::vector<Parameter*> FusedNetwork::parameters() {
  std::vector<Parameter*> out;
  for (Parameter* p : audio_.parameters()) out.push_back(p);
  for (Parameter* p : text_.parameters()) out.push_back(p);
  for (Parameter* p : video_.parameters()) out.push_back(p);
  out.push_back(&fc_weights_);
  out.push_back(&fc_bias_);
  out.push_back(&head_weights_);
  out.push_back(&head_bias_);
  return out;
}

std::map<std::string, std::string> FusedNetwork::config_map() const {
  std::map<std::string, std::string> map = audio_.config_map();
  map.merge(text_.config_map());
  map.merge(video_.config_map());
  map["fused.hidden_dim"] = std::to_string(hidden_dim_);
  map["fused.mode"] = fusion_mode_name(mode_);
  return map;
}

FusedNetwork build_fused(const AudioChannel& audio, const TextChannel& text,
                         const VideoChannel& video, FusionMode mode, std::size_t hidden_dim,
                         std::uint64_t head_seed) {
  return FusedNetwork(audio, text, video, mode, hidden_dim, head_seed);
}

}  // namespace trimodal
