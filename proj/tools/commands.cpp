#include "commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "trimodal/dataset.hpp"
#include "trimodal/errors.hpp"
#include "trimodal/fusion.hpp"
#include "trimodal/gradcheck_suite.hpp"
#include "trimodal/model_io.hpp"
#include "trimodal/synth.hpp"
#include "trimodal/trainer.hpp"
#include "trimodal/wav.hpp"

namespace {

using namespace trimodal;

namespace fs = std::filesystem;

std::string default_out_dir() {
  const char* env = std::getenv("TRIMODAL_OUT_DIR");
  return env != nullptr && *env != '\0' ? env : ".";
}

// --set key=value overrides for the model configuration.
struct Overrides {
  std::map<std::string, std::string> values;

  void add(const std::string& entry) {
    const std::size_t eq = entry.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ParameterError("--set expects key=value, got '" + entry + "'");
    }
    values[entry.substr(0, eq)] = entry.substr(eq + 1);
  }

  std::string take(const std::string& key, const std::string& fallback) {
    auto it = values.find(key);
    if (it == values.end()) return fallback;
    std::string v = it->second;
    values.erase(it);
    return v;
  }

  std::size_t take_size(const std::string& key, std::size_t fallback) {
    return static_cast<std::size_t>(std::stoull(take(key, std::to_string(fallback))));
  }

  double take_double(const std::string& key, double fallback) {
    return std::stod(take(key, std::to_string(fallback)));
  }

  void finish() const {
    if (!values.empty()) {
      throw ParameterError("unknown --set key '" + values.begin()->first + "'");
    }
  }
};

AudioChannelConfig audio_config_from(Overrides& overrides) {
  AudioChannelConfig config;
  config.filters = overrides.take_size("audio.filters", config.filters);
  config.first_window = overrides.take_size("audio.first_window", config.first_window);
  config.first_stride = overrides.take_size("audio.first_stride", config.first_stride);
  config.later_window = overrides.take_size("audio.later_window", config.later_window);
  config.later_stride = overrides.take_size("audio.later_stride", config.later_stride);
  config.penultimate_dim = overrides.take_size("audio.penultimate_dim", config.penultimate_dim);
  return config;
}

TextChannelConfig text_config_from(Overrides& overrides) {
  TextChannelConfig config;
  config.filters_per_width = overrides.take_size("text.filters", config.filters_per_width);
  config.dropout_p = overrides.take_double("text.dropout", config.dropout_p);
  config.penultimate_dim = overrides.take_size("text.penultimate_dim", config.penultimate_dim);
  return config;
}

VideoChannelConfig video_config_from(Overrides& overrides) {
  VideoChannelConfig config;
  config.input_size = overrides.take_size("video.input_size", config.input_size);
  config.head_hidden_dim = overrides.take_size("video.head_hidden", config.head_hidden_dim);
  config.backbone_seed = overrides.take_size("video.backbone_seed", config.backbone_seed);
  return config;
}

std::shared_ptr<const EmbeddingTable> make_table(const std::string& spec, std::size_t dim) {
  if (spec == "hashed") {
    return std::make_shared<EmbeddingTable>(EmbeddingTable::hashed(dim));
  }
  return std::make_shared<EmbeddingTable>(EmbeddingTable::load(spec));
}

// Loads a model checkpoint, building the embedding table it asks for.
std::unique_ptr<TraitModel> load_model_with_table(const fs::path& path,
                                                  const std::string& embeddings_spec) {
  const Checkpoint checkpoint = load_checkpoint(path);
  std::shared_ptr<const EmbeddingTable> table;
  auto dim_it = checkpoint.config.find("text.embed_dim");
  if (dim_it != checkpoint.config.end()) {
    table = make_table(embeddings_spec, std::stoull(dim_it->second));
  }
  return load_model(path, table);
}

const std::vector<ClipRecord>& records_for_split(const DatasetSplit& split,
                                                 const std::string& name) {
  if (name == "train") return split.train;
  if (name == "val") return split.validation;
  if (name == "test") return split.test;
  throw ParameterError("unknown split '" + name + "' (expected train, val or test)");
}

void print_metrics_row(const std::string& name, const Metrics& metrics, bool tsv) {
  char buf[256];
  if (tsv) {
    std::snprintf(buf, sizeof buf, "%s\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f\t%.4f", name.c_str(),
                  metrics.mean_mae, metrics.mae[0], metrics.mae[1], metrics.mae[2],
                  metrics.mae[3], metrics.mae[4], metrics.mean_accuracy);
  } else {
    std::snprintf(buf, sizeof buf, "%-9s %8.4f %8.4f %8.4f %8.4f %8.4f %8.4f        %8.4f",
                  name.c_str(), metrics.mean_mae, metrics.mae[0], metrics.mae[1], metrics.mae[2],
                  metrics.mae[3], metrics.mae[4], metrics.mean_accuracy);
  }
  std::cout << buf << "\n";
}

void print_metrics_header(bool tsv) {
  if (tsv) {
    std::cout << "model\tmean_mae\tmae_E\tmae_A\tmae_C\tmae_N\tmae_O\tmean_accuracy\n";
  } else {
    std::cout << "model     mean_mae    MAE_E    MAE_A    MAE_C    MAE_N    MAE_O   mean_accuracy\n";
  }
}

Metrics dlf_metrics(const FusionWeights& weights, const PredictionSet& predictions) {
  if (predictions.empty()) throw ValidationError("dlf evaluation: empty prediction set");
  TraitVector abs_err{};
  double mse = 0.0;
  for (const PredictionRecord& record : predictions) {
    const TraitVector fused = dlf_predict(weights, record.preds);
    double clip_mse = 0.0;
    for (std::size_t i = 0; i < kTraitCount; ++i) {
      const double diff = fused[i] - record.labels[i];
      abs_err[i] += std::abs(diff);
      clip_mse += diff * diff;
    }
    mse += clip_mse / static_cast<double>(kTraitCount);
  }
  const double inv = 1.0 / static_cast<double>(predictions.size());
  for (double& e : abs_err) e *= inv;
  return metrics_from_mae(abs_err, mse * inv);
}

struct ChannelSet {
  std::unique_ptr<TraitModel> audio_model, text_model, video_model;
  AudioChannel* audio = nullptr;
  TextChannel* text = nullptr;
  VideoChannel* video = nullptr;
};

ChannelSet load_channels(const std::string& audio_ckpt, const std::string& text_ckpt,
                         const std::string& video_ckpt, const std::string& embeddings_spec) {
  std::vector<std::string> missing;
  if (audio_ckpt.empty()) missing.push_back("audio");
  if (text_ckpt.empty()) missing.push_back("text");
  if (video_ckpt.empty()) missing.push_back("video");
  if (!missing.empty()) {
    std::string what;
    for (const std::string& m : missing) what += (what.empty() ? "" : ", ") + m;
    throw ParameterError("missing channel checkpoints: train these first and pass them via "
                         "--audio-ckpt/--text-ckpt/--video-ckpt (missing: " + what + ")");
  }
  ChannelSet set;
  set.audio_model = load_model_with_table(audio_ckpt, embeddings_spec);
  set.text_model = load_model_with_table(text_ckpt, embeddings_spec);
  set.video_model = load_model_with_table(video_ckpt, embeddings_spec);
  set.audio = dynamic_cast<AudioChannel*>(set.audio_model.get());
  set.text = dynamic_cast<TextChannel*>(set.text_model.get());
  set.video = dynamic_cast<VideoChannel*>(set.video_model.get());
  if (set.audio == nullptr) throw ValidationError("--audio-ckpt is not an audio checkpoint");
  if (set.text == nullptr) throw ValidationError("--text-ckpt is not a text checkpoint");
  if (set.video == nullptr) throw ValidationError("--video-ckpt is not a video checkpoint");
  return set;
}

// ---------------------------------------------------------------------------
// subcommands
// ---------------------------------------------------------------------------

int run_synth(const std::string& out_dir, SynthConfig config) {
  const SynthResult result = synth_generate(config, out_dir);
  std::cout << "wrote " << result.split.total() << " clips to " << out_dir << " (train/val/test = "
            << result.split.train.size() << "/" << result.split.validation.size() << "/"
            << result.split.test.size() << ")\n";
  std::cout << "manifest: " << result.manifest_path.string() << "\n";
  return 0;
}

struct TrainArgs {
  std::string modality;
  std::string manifest;
  std::string out_dir;
  std::string embeddings = "hashed";
  std::string audio_ckpt, text_ckpt, video_ckpt;
  TrainConfig train_config;
  std::vector<std::string> overrides;
  std::uint64_t init_seed = 1;
};

int run_train(const TrainArgs& args) {
  Overrides overrides;
  for (const std::string& entry : args.overrides) overrides.add(entry);

  const DatasetSplit split = parse_manifest(args.manifest);
  if (split.train.empty()) throw ValidationError("manifest has no training records");
  if (split.validation.empty()) throw ValidationError("manifest has no validation records");
  const std::vector<ClipData> train_clips = load_clips(split.train);
  const std::vector<ClipData> val_clips = load_clips(split.validation);

  std::unique_ptr<TraitModel> model;
  if (args.modality == "audio") {
    model = std::make_unique<AudioChannel>(audio_config_from(overrides), args.init_seed);
  } else if (args.modality == "text") {
    const std::size_t embed_dim = overrides.take_size("text.embed_dim", 300);
    model = std::make_unique<TextChannel>(text_config_from(overrides),
                                          make_table(args.embeddings, embed_dim), args.init_seed);
  } else if (args.modality == "video") {
    model = std::make_unique<VideoChannel>(video_config_from(overrides), args.init_seed);
  } else if (args.modality == "nnlb" || args.modality == "nnfb") {
    ChannelSet channels =
        load_channels(args.audio_ckpt, args.text_ckpt, args.video_ckpt, args.embeddings);
    const std::size_t hidden = overrides.take_size("fused.hidden", 256);
    const FusionMode mode =
        args.modality == "nnlb" ? FusionMode::kLimitedBackprop : FusionMode::kFullBackprop;
    model = std::make_unique<FusedNetwork>(*channels.audio, *channels.text, *channels.video, mode,
                                           hidden, args.init_seed);
  } else {
    throw ParameterError("unknown modality '" + args.modality +
                         "' (expected audio, text, video, nnlb or nnfb)");
  }
  overrides.finish();

  const TrainHistory history = train(*model, train_clips, val_clips, args.train_config);

  fs::create_directories(args.out_dir);
  const fs::path ckpt_path = fs::path(args.out_dir) / (args.modality + ".ckpt");
  const fs::path history_path = fs::path(args.out_dir) / (args.modality + "_history.tsv");
  save_model(ckpt_path, *model);
  write_history_tsv(history_path, history);

  const double best_val =
      history.best_epoch > 0 ? history.epochs[history.best_epoch - 1].val_mse : 0.0;
  std::cout << "trained " << args.modality << ": " << history.epochs.size() << " epochs, "
            << history.steps << " steps, best epoch " << history.best_epoch << " (val MSE "
            << best_val << ", " << history.stop_reason << ")\n";
  std::cout << "checkpoint: " << ckpt_path.string() << "\n";
  std::cout << "history:    " << history_path.string() << "\n";
  return 0;
}

int run_fit_dlf(const std::string& manifest, const std::string& audio_ckpt,
                const std::string& text_ckpt, const std::string& video_ckpt,
                const std::string& embeddings, const std::string& split_name,
                const std::string& out_path) {
  ChannelSet channels = load_channels(audio_ckpt, text_ckpt, video_ckpt, embeddings);
  const DatasetSplit split = parse_manifest(manifest);
  const std::vector<ClipRecord>& records = records_for_split(split, split_name);
  if (records.empty()) throw ValidationError("split '" + split_name + "' is empty");
  const std::vector<ClipData> clips = load_clips(records);

  const PredictionSet devset =
      collect_predictions(*channels.audio, *channels.text, *channels.video, clips);
  const DlfFitResult fit = dlf_fit(devset);
  fit.weights.save(out_path);

  // Weight table: one row per modality, one column per trait.
  std::cout << "Weights      E      A      C      N      O\n";
  char buf[128];
  for (std::size_t j = 0; j < kModalityCount; ++j) {
    std::snprintf(buf, sizeof buf, "%-8s %5.2f  %5.2f  %5.2f  %5.2f  %5.2f", kModalityNames[j],
                  fit.weights.w[0][j], fit.weights.w[1][j], fit.weights.w[2][j],
                  fit.weights.w[3][j], fit.weights.w[4][j]);
    std::cout << buf << "\n";
  }
  double mean_obj = 0.0;
  for (double obj : fit.objective) mean_obj += obj;
  mean_obj /= static_cast<double>(kTraitCount);
  std::snprintf(buf, sizeof buf,
                "dev MAE  %5.4f (E %.4f, A %.4f, C %.4f, N %.4f, O %.4f)", mean_obj,
                fit.objective[0], fit.objective[1], fit.objective[2], fit.objective[3],
                fit.objective[4]);
  std::cout << buf << "\n";
  for (std::size_t i = 0; i < kTraitCount; ++i) {
    if (fit.degenerate[i]) {
      std::cout << "note: trait " << kTraitNames[i]
                << " is degenerate (modalities agree everywhere); uniform weights returned\n";
    }
  }
  std::cout << "weights written to " << out_path << "\n";
  return 0;
}

struct EvalArgs {
  std::string manifest;
  std::string split_name = "test";
  std::string ckpt;
  std::string dlf_weights;
  std::string audio_ckpt, text_ckpt, video_ckpt;
  std::string embeddings = "hashed";
  bool baseline = false;
  bool tsv = false;
};

int run_eval(const EvalArgs& args) {
  const DatasetSplit split = parse_manifest(args.manifest);
  const std::vector<ClipRecord>& records = records_for_split(split, args.split_name);
  if (records.empty()) throw ValidationError("split '" + args.split_name + "' is empty");
  const std::vector<ClipData> clips = load_clips(records);

  print_metrics_header(args.tsv);
  if (!args.dlf_weights.empty()) {
    ChannelSet channels =
        load_channels(args.audio_ckpt, args.text_ckpt, args.video_ckpt, args.embeddings);
    const FusionWeights weights = FusionWeights::load(args.dlf_weights);
    const PredictionSet predictions =
        collect_predictions(*channels.audio, *channels.text, *channels.video, clips);
    print_metrics_row("dlf", dlf_metrics(weights, predictions), args.tsv);
  } else if (!args.ckpt.empty()) {
    std::unique_ptr<TraitModel> model = load_model_with_table(args.ckpt, args.embeddings);
    print_metrics_row(model->kind(), evaluate(*model, clips), args.tsv);
  } else if (!args.baseline) {
    throw ParameterError("eval needs --ckpt, or --dlf with channel checkpoints, or --baseline");
  }

  if (args.baseline) {
    if (split.train.empty()) throw ValidationError("baseline needs training records");
    std::vector<ClipData> train_clips = load_clips(split.train);
    const TraitVector mean = baseline_train_mean(train_clips);
    print_metrics_row("baseline", evaluate_constant(mean, clips), args.tsv);
  }
  return 0;
}

int run_gradcheck(const std::string& scope, std::size_t seeds, double tolerance) {
  std::vector<std::string> scopes;
  if (scope == "all") {
    scopes = {"ops", "audio", "text", "video", "fused"};
  } else {
    scopes = {scope};
  }
  bool all_pass = true;
  char buf[160];
  for (const std::string& s : scopes) {
    for (const OpCheckResult& result : run_gradcheck_suite(s, seeds, tolerance)) {
      std::snprintf(buf, sizeof buf, "%-22s max rel err %.3e  %s", result.name.c_str(),
                    result.max_rel_error, result.pass ? "PASS" : "FAIL");
      std::cout << buf << "\n";
      all_pass = all_pass && result.pass;
    }
  }
  if (!all_pass) {
    std::cerr << "gradcheck failed\n";
    return 3;
  }
  return 0;
}

struct PredictArgs {
  std::string model;
  std::string ckpt;
  std::string weights;
  std::string audio_ckpt, text_ckpt, video_ckpt;
  std::string embeddings = "hashed";
  std::string audio_path;
  std::string text_input;
  std::vector<std::string> frames;
  std::string feature_file;
  std::string clip_id = "cli";
};

ClipData build_clip(const PredictArgs& args, bool need_audio, bool need_text, bool need_video) {
  ClipData clip;
  clip.clip_id = args.clip_id;
  if (need_audio) {
    if (args.audio_path.empty()) throw ParameterError("missing --audio input for this model");
    clip.audio = resample_to_8khz(read_wav(args.audio_path));
  }
  if (need_text) {
    if (args.text_input.empty()) throw ParameterError("missing --text input for this model");
    clip.transcript = normalize_text(args.text_input);
  }
  if (need_video) {
    if (!args.feature_file.empty()) {
      for (auto& [id, features] : parse_feature_file(args.feature_file)) {
        if (id == args.clip_id) clip.features = std::move(features);
      }
      if (!clip.features) {
        throw ValidationError("feature file has no entry for clip id '" + args.clip_id + "'");
      }
    } else if (!args.frames.empty()) {
      clip.frame_paths = args.frames;
    } else {
      throw ParameterError("missing --frame (or --features-file) input for this model");
    }
  }
  return clip;
}

int run_predict(const PredictArgs& args) {
  TraitVector scores{};
  Rng rng(0);
  if (args.model == "dlf") {
    ChannelSet channels =
        load_channels(args.audio_ckpt, args.text_ckpt, args.video_ckpt, args.embeddings);
    if (args.weights.empty()) throw ParameterError("dlf prediction needs --weights");
    const FusionWeights weights = FusionWeights::load(args.weights);
    ClipData clip = build_clip(args, true, true, true);
    const PredictionSet predictions =
        collect_predictions(*channels.audio, *channels.text, *channels.video, {clip});
    scores = dlf_predict(weights, predictions.front().preds);
  } else {
    if (args.ckpt.empty()) throw ParameterError("predict needs --ckpt");
    std::unique_ptr<TraitModel> model = load_model_with_table(args.ckpt, args.embeddings);
    const std::string kind = model->kind();
    const bool fusedkind = kind == "nnlb" || kind == "nnfb";
    ClipData clip = build_clip(args, kind == "audio" || fusedkind, kind == "text" || fusedkind,
                               kind == "video" || fusedkind);
    NoGradGuard guard;
    const Tensor traits = model->forward(clip, /*training=*/false, rng);
    for (std::size_t i = 0; i < kTraitCount; ++i) scores[i] = traits[i];
  }
  char buf[80];
  std::snprintf(buf, sizeof buf, "%.4f %.4f %.4f %.4f %.4f", scores[0], scores[1], scores[2],
                scores[3], scores[4]);
  std::cout << buf << "\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"tri-modal Big Five trait regression toolkit"};
  app.require_subcommand(1);

  int exit_code = 0;
  std::function<int()> action;

  // --- synth ---
  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic corpus");
  auto synth_out = std::make_shared<std::string>(default_out_dir());
  auto synth_config = std::make_shared<SynthConfig>();
  synth_cmd->add_option("--out", *synth_out, "output directory");
  synth_cmd->add_option("--n", synth_config->n_clips, "number of clips");
  synth_cmd->add_option("--seed", synth_config->seed, "generator seed");
  synth_cmd->add_option("--clip-seconds", synth_config->clip_seconds, "clip length in seconds");
  synth_cmd->add_option("--sample-rate", synth_config->sample_rate, "sample rate in Hz");
  synth_cmd->add_option("--frames", synth_config->frames_per_clip, "frames per clip");
  synth_cmd->add_option("--frame-size", synth_config->frame_size, "frame edge length in pixels");
  synth_cmd->add_option("--words", synth_config->words_per_clip, "words per clip");
  synth_cmd->callback([&action, synth_out, synth_config] {
    action = [synth_out, synth_config] { return run_synth(*synth_out, *synth_config); };
  });

  // --- train ---
  auto* train_cmd = app.add_subcommand("train", "train a channel or fused model");
  auto train_args = std::make_shared<TrainArgs>();
  train_args->out_dir = default_out_dir();
  train_cmd->add_option("modality", train_args->modality, "audio|text|video|nnlb|nnfb")
      ->required();
  train_cmd->add_option("--manifest", train_args->manifest, "dataset manifest")->required();
  train_cmd->add_option("--out", train_args->out_dir, "output directory");
  train_cmd->add_option("--seed", train_args->train_config.seed, "training seed");
  train_cmd->add_option("--init-seed", train_args->init_seed, "parameter init seed");
  train_cmd->add_option("--epochs", train_args->train_config.max_epochs, "epoch budget");
  train_cmd->add_option("--batch", train_args->train_config.batch_size, "mini-batch size");
  train_cmd->add_option("--lr", train_args->train_config.lr, "Adam learning rate");
  train_cmd->add_option("--patience", train_args->train_config.patience, "early-stop patience");
  train_cmd->add_flag_callback(
      "--no-shuffle", [train_args] { train_args->train_config.shuffle = false; },
      "keep training order fixed");
  train_cmd->add_option("--embeddings", train_args->embeddings,
                        "embedding table path, or 'hashed'");
  train_cmd->add_option("--audio-ckpt", train_args->audio_ckpt, "trained audio checkpoint");
  train_cmd->add_option("--text-ckpt", train_args->text_ckpt, "trained text checkpoint");
  train_cmd->add_option("--video-ckpt", train_args->video_ckpt, "trained video checkpoint");
  train_cmd->add_option("--set", train_args->overrides, "config override key=value");
  train_cmd->callback([&action, train_args] {
    action = [train_args] { return run_train(*train_args); };
  });

  // --- fit-dlf ---
  auto* dlf_cmd = app.add_subcommand("fit-dlf", "fit decision-level fusion weights");
  auto dlf_manifest = std::make_shared<std::string>();
  auto dlf_audio = std::make_shared<std::string>();
  auto dlf_text = std::make_shared<std::string>();
  auto dlf_video = std::make_shared<std::string>();
  auto dlf_embeddings = std::make_shared<std::string>("hashed");
  auto dlf_split = std::make_shared<std::string>("val");
  auto dlf_out = std::make_shared<std::string>(default_out_dir() + "/dlf_weights.tsv");
  dlf_cmd->add_option("--manifest", *dlf_manifest, "dataset manifest")->required();
  dlf_cmd->add_option("--audio-ckpt", *dlf_audio, "trained audio checkpoint");
  dlf_cmd->add_option("--text-ckpt", *dlf_text, "trained text checkpoint");
  dlf_cmd->add_option("--video-ckpt", *dlf_video, "trained video checkpoint");
  dlf_cmd->add_option("--embeddings", *dlf_embeddings, "embedding table path, or 'hashed'");
  dlf_cmd->add_option("--split", *dlf_split, "development split (default val)");
  dlf_cmd->add_option("--out", *dlf_out, "weights file to write");
  dlf_cmd->callback([&action, dlf_manifest, dlf_audio, dlf_text, dlf_video, dlf_embeddings,
                     dlf_split, dlf_out] {
    action = [=] {
      return run_fit_dlf(*dlf_manifest, *dlf_audio, *dlf_text, *dlf_video, *dlf_embeddings,
                         *dlf_split, *dlf_out);
    };
  });

  // --- eval ---
  auto* eval_cmd = app.add_subcommand("eval", "evaluate a model on a split");
  auto eval_args = std::make_shared<EvalArgs>();
  eval_cmd->add_option("--manifest", eval_args->manifest, "dataset manifest")->required();
  eval_cmd->add_option("--split", eval_args->split_name, "train|val|test (default test)");
  eval_cmd->add_option("--ckpt", eval_args->ckpt, "model checkpoint");
  eval_cmd->add_option("--dlf", eval_args->dlf_weights, "decision-level fusion weights file");
  eval_cmd->add_option("--audio-ckpt", eval_args->audio_ckpt, "audio checkpoint (for --dlf)");
  eval_cmd->add_option("--text-ckpt", eval_args->text_ckpt, "text checkpoint (for --dlf)");
  eval_cmd->add_option("--video-ckpt", eval_args->video_ckpt, "video checkpoint (for --dlf)");
  eval_cmd->add_option("--embeddings", eval_args->embeddings, "embedding table path, or 'hashed'");
  eval_cmd->add_flag("--baseline", eval_args->baseline, "include the train-label-mean baseline");
  eval_cmd->add_flag("--tsv", eval_args->tsv, "machine-readable output");
  eval_cmd->callback([&action, eval_args] {
    action = [eval_args] { return run_eval(*eval_args); };
  });

  // --- gradcheck ---
  auto* grad_cmd = app.add_subcommand("gradcheck", "finite-difference gradient checks");
  auto grad_scope = std::make_shared<std::string>("all");
  auto grad_seeds = std::make_shared<std::size_t>(20);
  auto grad_tolerance = std::make_shared<double>(1e-4);
  grad_cmd->add_option("scope", *grad_scope, "ops|audio|text|video|fused|all");
  grad_cmd->add_option("--seeds", *grad_seeds, "random seeds per check");
  grad_cmd->add_option("--tolerance", *grad_tolerance, "max allowed relative error");
  grad_cmd->callback([&action, grad_scope, grad_seeds, grad_tolerance] {
    action = [=] { return run_gradcheck(*grad_scope, *grad_seeds, *grad_tolerance); };
  });

  // --- predict ---
  auto* predict_cmd = app.add_subcommand("predict", "score one clip");
  auto predict_args = std::make_shared<PredictArgs>();
  predict_cmd->add_option("--model", predict_args->model, "audio|text|video|nnlb|nnfb|dlf");
  predict_cmd->add_option("--ckpt", predict_args->ckpt, "model checkpoint");
  predict_cmd->add_option("--weights", predict_args->weights, "dlf weights file");
  predict_cmd->add_option("--audio-ckpt", predict_args->audio_ckpt, "audio checkpoint (dlf)");
  predict_cmd->add_option("--text-ckpt", predict_args->text_ckpt, "text checkpoint (dlf)");
  predict_cmd->add_option("--video-ckpt", predict_args->video_ckpt, "video checkpoint (dlf)");
  predict_cmd->add_option("--embeddings", predict_args->embeddings,
                          "embedding table path, or 'hashed'");
  predict_cmd->add_option("--audio", predict_args->audio_path, "input WAV file");
  predict_cmd->add_option("--text", predict_args->text_input, "input transcript text");
  predict_cmd->add_option("--frame", predict_args->frames, "input PPM frame (repeatable)");
  predict_cmd->add_option("--features-file", predict_args->feature_file,
                          "precomputed feature file");
  predict_cmd->add_option("--clip-id", predict_args->clip_id, "clip id inside the feature file");
  predict_cmd->callback([&action, predict_args] {
    action = [predict_args] { return run_predict(*predict_args); };
  });

  try {
    app.parse(argc, argv);
    if (action) exit_code = action();
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what();
    if (!e.clip_ids().empty()) {
      std::cerr << " (batch:";
      for (const std::string& id : e.clip_ids()) std::cerr << " " << id;
      std::cerr << ")";
    }
    std::cerr << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return exit_code;
}
