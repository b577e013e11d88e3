#include "trimodal/gradcheck_suite.hpp"

#include <cmath>
#include <functional>

#include "trimodal/errors.hpp"
#include "trimodal/fusion.hpp"
#include "trimodal/ops.hpp"

namespace trimodal {

namespace {

Tensor random_tensor(std::vector<std::size_t> shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  return Tensor::uniform(std::move(shape), lo, hi, rng);
}

// Keeps relu inputs away from the kink at zero.
Tensor random_tensor_off_zero(std::vector<std::size_t> shape, Rng& rng) {
  Tensor t = random_tensor(std::move(shape), rng);
  for (double& v : t.values()) {
    if (std::abs(v) < 5e-3) v += v >= 0.0 ? 0.1 : -0.1;
  }
  return t;
}

// Moves every parameter to a generic position. Zero-initialized biases put
// relu pre-activations exactly on the kink (a window of relu-clamped zeros
// contributes bias alone), where the subgradient convention and the central
// difference legitimately disagree.
void jitter_parameters(const std::vector<Parameter*>& params, Rng& rng) {
  for (Parameter* p : params) {
    for (double& v : p->tensor.values()) v += rng.uniform(-0.08, 0.08);
  }
}

// Reduces an arbitrary tensor to a scalar with nonuniform weights so that
// gradient errors cannot cancel.
Tensor spread_sum(const Tensor& t, double phase = 0.3) {
  std::vector<double> coeffs(t.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    coeffs[i] = 0.5 + 0.5 * std::sin(phase + 1.7 * static_cast<double>(i));
  }
  return sum(mul(t, Tensor(t.shape(), std::move(coeffs))));
}

using CheckFn = std::function<double(std::uint64_t seed)>;

double run_seeded(const CheckFn& fn, std::size_t seeds) {
  double worst = 0.0;
  for (std::size_t s = 0; s < seeds; ++s) {
    worst = std::max(worst, fn(s + 1));
  }
  return worst;
}

double check_audio_loss(std::uint64_t seed) {
  AudioChannelConfig config;
  config.first_window = 8;
  config.first_stride = 4;
  config.later_window = 2;
  config.later_stride = 2;
  config.filters = 3;
  config.penultimate_dim = 6;
  AudioChannel channel(config, seed);

  Rng rng(seed ^ 0xa5a5);
  jitter_parameters(channel.parameters(), rng);
  const std::size_t length = 40;
  std::vector<Tensor> batch;
  std::vector<Tensor> labels;
  for (int i = 0; i < 2; ++i) {
    batch.push_back(random_tensor({2, length}, rng));
    labels.push_back(random_tensor({kTraitCount}, rng, 0.1, 0.9));
  }
  auto loss_fn = [&] {
    std::vector<Tensor> losses;
    for (int i = 0; i < 2; ++i) {
      ChannelOutput out = channel.forward_tensor(batch[i], /*training=*/false);
      losses.push_back(mse_over_traits(out.traits, labels[i]));
    }
    return scale(add(losses[0], losses[1]), 0.5);
  };
  return finite_diff_check_params(loss_fn, channel.parameters()).max_rel_error;
}

double check_text_loss(std::uint64_t seed) {
  TextChannelConfig config;
  config.filters_per_width = 3;
  config.penultimate_dim = 6;
  config.dropout_p = 0.5;  // inactive: the check runs in evaluation mode
  auto table = std::make_shared<EmbeddingTable>(EmbeddingTable::hashed(6));
  TextChannel channel(config, table, seed);

  Rng rng(seed ^ 0x5a5a);
  jitter_parameters(channel.parameters(), rng);
  Transcript transcript;
  transcript.sentences = {{"alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta"},
                          {"theta", "iota", "kappa"}};
  Tensor label = random_tensor({kTraitCount}, rng, 0.1, 0.9);
  Rng forward_rng(7);
  auto loss_fn = [&] {
    ChannelOutput out = channel.forward_channel(transcript, /*training=*/false, forward_rng);
    return mse_over_traits(out.traits, label);
  };
  return finite_diff_check_params(loss_fn, channel.parameters()).max_rel_error;
}

double check_video_loss(std::uint64_t seed) {
  VideoChannelConfig config;
  config.head_hidden_dim = 12;
  VideoChannel channel(config, seed);

  Rng rng(seed ^ 0x1f1f);
  jitter_parameters(trainable_parameters(channel.parameters()), rng);
  FeatureVector features;
  features.values.resize(config.feature_dim);
  for (double& v : features.values) v = rng.uniform(-1.0, 1.0);
  Tensor label = random_tensor({kTraitCount}, rng, 0.1, 0.9);
  auto loss_fn = [&] {
    ChannelOutput out = channel.forward_features(features);
    return mse_over_traits(out.traits, label);
  };
  return finite_diff_check_params(loss_fn, trainable_parameters(channel.parameters()))
      .max_rel_error;
}

double check_fused_loss(std::uint64_t seed) {
  AudioChannelConfig audio_config;
  audio_config.first_window = 8;
  audio_config.first_stride = 4;
  audio_config.later_window = 2;
  audio_config.later_stride = 2;
  audio_config.filters = 3;
  audio_config.penultimate_dim = 5;
  AudioChannel audio(audio_config, seed);

  TextChannelConfig text_config;
  text_config.filters_per_width = 2;
  text_config.penultimate_dim = 5;
  auto table = std::make_shared<EmbeddingTable>(EmbeddingTable::hashed(4));
  TextChannel text(text_config, table, seed + 1);

  VideoChannelConfig video_config;
  video_config.head_hidden_dim = 7;
  VideoChannel video(video_config, seed + 2);

  FusedNetwork fused(audio, text, video, FusionMode::kFullBackprop, 6, seed + 3);

  Rng rng(seed ^ 0x7777);
  jitter_parameters(trainable_parameters(fused.parameters()), rng);
  ClipData clip;
  clip.clip_id = "gradcheck";
  clip.audio.sample_rate = 8000;
  clip.audio.samples.resize(40);
  for (double& s : clip.audio.samples) s = rng.uniform(-0.9, 0.9);
  clip.transcript.sentences = {{"one", "two", "three", "four", "five", "six"}};
  clip.features = FeatureVector{};
  clip.features->values.resize(video_config.feature_dim);
  for (double& v : clip.features->values) v = rng.uniform(-1.0, 1.0);
  clip.labels = {0.3, 0.5, 0.7, 0.4, 0.6};

  Rng forward_rng(11);
  Tensor label({kTraitCount}, std::vector<double>(clip.labels.begin(), clip.labels.end()));
  auto loss_fn = [&] {
    Tensor traits = fused.forward(clip, /*training=*/false, forward_rng);
    return mse_over_traits(traits, label);
  };
  return finite_diff_check_params(loss_fn, trainable_parameters(fused.parameters()))
      .max_rel_error;
}

std::vector<OpCheckResult> ops_suite(std::size_t seeds, double tolerance) {
  struct OpCase {
    std::string name;
    CheckFn fn;
  };

  const std::vector<OpCase> cases = {
      {"add",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor a = random_tensor({3, 4}, rng), b = random_tensor({3, 4}, rng);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) { return spread_sum(add(in[0], in[1])); },
                    {a, b})
             .max_rel_error;
       }},
      {"mul",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor a = random_tensor({3, 4}, rng), b = random_tensor({3, 4}, rng);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) { return spread_sum(mul(in[0], in[1])); },
                    {a, b})
             .max_rel_error;
       }},
      {"scale",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor a = random_tensor({7}, rng);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) { return spread_sum(scale(in[0], -1.7)); },
                    {a})
             .max_rel_error;
       }},
      {"sum",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor a = random_tensor({6}, rng);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) { return sum(in[0]); }, {a})
             .max_rel_error;
       }},
      {"conv1d",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor x = random_tensor({2, 32}, rng);
         Tensor k = random_tensor({3, 2, 4}, rng);
         Tensor b = random_tensor({3}, rng);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) {
                      return spread_sum(conv1d(in[0], in[1], in[2], 2));
                    },
                    {x, k, b})
             .max_rel_error;
       }},
      {"conv2d",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor x = random_tensor({2, 6, 7}, rng);
         Tensor k = random_tensor({3, 2, 3, 3}, rng);
         Tensor b = random_tensor({3}, rng);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) {
                      return spread_sum(conv2d(in[0], in[1], in[2], 1, 1));
                    },
                    {x, k, b})
             .max_rel_error;
       }},
      {"max_pool2d",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor x = random_tensor({2, 6, 6}, rng);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) { return spread_sum(max_pool2d(in[0], 2)); },
                    {x})
             .max_rel_error;
       }},
      {"fully_connected",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor x = random_tensor({3}, rng);
         Tensor w = random_tensor({4, 3}, rng);
         Tensor b = random_tensor({4}, rng);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) {
                      return spread_sum(fully_connected(in[0], in[1], in[2]));
                    },
                    {x, w, b})
             .max_rel_error;
       }},
      {"sigmoid",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor x = random_tensor({9}, rng, -3.0, 3.0);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) { return spread_sum(sigmoid(in[0])); }, {x})
             .max_rel_error;
       }},
      {"relu",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor x = random_tensor_off_zero({9}, rng);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) { return spread_sum(relu(in[0])); }, {x})
             .max_rel_error;
       }},
      {"global_avg_pool",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor x = random_tensor({3, 8}, rng);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) {
                      return spread_sum(global_avg_pool(in[0]));
                    },
                    {x})
             .max_rel_error;
       }},
      {"max_over_time",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor x = random_tensor({3, 8}, rng);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) { return spread_sum(max_over_time(in[0])); },
                    {x})
             .max_rel_error;
       }},
      {"dropout",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor x = random_tensor({16}, rng);
         return finite_diff_check(
                    [seed](const std::vector<Tensor>& in) {
                      Rng mask_rng(seed * 1000 + 17);  // same mask on every evaluation
                      return spread_sum(dropout(in[0], 0.5, true, mask_rng));
                    },
                    {x})
             .max_rel_error;
       }},
      {"concat",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor a = random_tensor({3}, rng), b = random_tensor({5}, rng),
                c = random_tensor({2}, rng);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) {
                      return spread_sum(concat({in[0], in[1], in[2]}));
                    },
                    {a, b, c})
             .max_rel_error;
       }},
      {"average",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor a = random_tensor({6}, rng), b = random_tensor({6}, rng),
                c = random_tensor({6}, rng);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) {
                      return spread_sum(average({in[0], in[1], in[2]}));
                    },
                    {a, b, c})
             .max_rel_error;
       }},
      {"softmax",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor x = random_tensor({5}, rng, -2.0, 2.0);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) { return spread_sum(softmax(in[0])); }, {x})
             .max_rel_error;
       }},
      {"weighted_sum",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor w = random_tensor({3}, rng);
         Tensor a = random_tensor({6}, rng), b = random_tensor({6}, rng),
                c = random_tensor({6}, rng);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) {
                      return spread_sum(weighted_sum(in[0], {in[1], in[2], in[3]}));
                    },
                    {w, a, b, c})
             .max_rel_error;
       }},
      {"reshape",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor x = random_tensor({3, 4}, rng);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) {
                      return spread_sum(reshape(in[0], {2, 6}));
                    },
                    {x})
             .max_rel_error;
       }},
      {"mse_over_traits",
       [](std::uint64_t seed) {
         Rng rng(seed);
         Tensor pred = random_tensor({5}, rng, 0.0, 1.0);
         Tensor label = random_tensor({5}, rng, 0.0, 1.0);
         return finite_diff_check(
                    [](const std::vector<Tensor>& in) {
                      return mse_over_traits(in[0], in[1]);
                    },
                    {pred, label})
             .max_rel_error;
       }},
  };

  std::vector<OpCheckResult> results;
  results.reserve(cases.size());
  for (const OpCase& c : cases) {
    const double worst = run_seeded(c.fn, seeds);
    results.push_back({c.name, worst, worst < tolerance});
  }
  return results;
}

}  // namespace

std::vector<OpCheckResult> run_gradcheck_suite(const std::string& scope, std::size_t seeds,
                                               double tolerance) {
  if (seeds == 0) throw ParameterError("gradcheck: seeds must be positive");
  if (scope == "ops") return ops_suite(seeds, tolerance);

  CheckFn fn;
  std::string name;
  if (scope == "audio") {
    name = "audio_channel_loss";
    fn = check_audio_loss;
  } else if (scope == "text") {
    name = "text_channel_loss";
    fn = check_text_loss;
  } else if (scope == "video") {
    name = "video_head_loss";
    fn = check_video_loss;
  } else if (scope == "fused") {
    name = "fused_nnfb_loss";
    fn = check_fused_loss;
  } else {
    throw ParameterError("gradcheck: unknown scope '" + scope +
                         "' (expected ops, audio, text, video or fused)");
  }
  const double worst = run_seeded(fn, seeds);
  return {{name, worst, worst < tolerance}};
}

}  // namespace trimodal
