#include "trimodal/trainer.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

#include "trimodal/errors.hpp"
#include "trimodal/ops.hpp"

namespace trimodal {

namespace {

void fisher_yates(std::vector<std::size_t>& order, Rng& rng) {
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
}

void scale_gradients(const std::vector<Parameter*>& params, double factor) {
  for (Parameter* p : params) {
    if (!p->tensor.has_grad()) continue;
    for (double& g : p->tensor.node()->grad) g *= factor;
  }
}

std::vector<std::vector<double>> snapshot_values(const std::vector<Parameter*>& params) {
  std::vector<std::vector<double>> out;
  out.reserve(params.size());
  for (Parameter* p : params) {
    const auto v = p->tensor.values();
    out.emplace_back(v.begin(), v.end());
  }
  return out;
}

void restore_values(const std::vector<Parameter*>& params,
                    const std::vector<std::vector<double>>& snapshot) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto v = params[i]->tensor.values();
    std::copy(snapshot[i].begin(), snapshot[i].end(), v.begin());
  }
}

}  // namespace

void TrainConfig::validate() const {
  if (batch_size == 0 || max_epochs == 0 || patience == 0) {
    throw ParameterError("train config: batch_size, max_epochs and patience must be positive");
  }
  if (patience > max_epochs) {
    throw ParameterError("train config: patience must not exceed max_epochs");
  }
  if (lr <= 0.0) throw ParameterError("train config: lr must be positive");
}

Metrics metrics_from_mae(const TraitVector& mae, double mse) {
  Metrics metrics;
  metrics.mae = mae;
  metrics.mse = mse;
  double mae_sum = 0.0, acc_sum = 0.0;
  for (std::size_t i = 0; i < kTraitCount; ++i) {
    metrics.accuracy[i] = 1.0 - mae[i];
    mae_sum += mae[i];
    acc_sum += metrics.accuracy[i];
  }
  metrics.mean_mae = mae_sum / static_cast<double>(kTraitCount);
  metrics.mean_accuracy = acc_sum / static_cast<double>(kTraitCount);
  return metrics;
}

Tensor label_tensor(const TraitVector& labels) {
  return Tensor({kTraitCount}, std::vector<double>(labels.begin(), labels.end()));
}

TrainHistory train(TraitModel& model, const std::vector<ClipData>& train_clips,
                   const std::vector<ClipData>& val_clips, const TrainConfig& config) {
  config.validate();
  if (train_clips.empty()) throw ValidationError("train: empty training set");
  if (val_clips.empty()) throw ValidationError("train: empty validation set");

  const std::vector<Parameter*> params = model.parameters();
  Adam adam(AdamConfig{.lr = config.lr});
  Rng rng(config.seed);

  TrainHistory history;
  double best_val = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best_values = snapshot_values(params);
  history.best_epoch = 0;
  std::size_t epochs_since_best = 0;

  std::vector<std::size_t> order(train_clips.size());
  std::iota(order.begin(), order.end(), 0);

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    if (config.shuffle) fisher_yates(order, rng);

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      zero_gradients(params);
      double batch_loss = 0.0;
      for (std::size_t b = start; b < end; ++b) {
        const ClipData& clip = train_clips[order[b]];
        Tensor traits = model.forward(clip, /*training=*/true, rng);
        Tensor loss = mse_over_traits(traits, label_tensor(clip.labels));
        if (loss.requires_grad()) backward(loss);
        batch_loss += loss.value();
      }
      if (!std::isfinite(batch_loss)) {
        std::vector<std::string> ids;
        for (std::size_t b = start; b < end; ++b) ids.push_back(train_clips[order[b]].clip_id);
        throw NumericError("non-finite training loss", std::move(ids));
      }
      scale_gradients(params, 1.0 / static_cast<double>(end - start));
      adam.step(params);
      ++history.steps;
      epoch_loss += batch_loss;
    }

    const double train_mse = epoch_loss / static_cast<double>(order.size());
    const double val_mse = evaluate(model, val_clips).mse;

    const bool improved = val_mse < best_val;
    if (improved) {
      best_val = val_mse;
      best_values = snapshot_values(params);
      history.best_epoch = epoch;
      epochs_since_best = 0;
    } else {
      ++epochs_since_best;
    }
    history.epochs.push_back({epoch, train_mse, val_mse, improved});

    if (epochs_since_best >= config.patience) {
      history.stop_reason = "early_stop";
      break;
    }
  }
  if (history.stop_reason.empty()) history.stop_reason = "max_epochs";

  restore_values(params, best_values);
  return history;
}

Metrics evaluate(TraitModel& model, const std::vector<ClipData>& clips) {
  if (clips.empty()) throw ValidationError("evaluate: empty record list");
  NoGradGuard guard;
  Rng rng(0);  // evaluation-mode forwards draw nothing
  TraitVector abs_err{};
  double mse = 0.0;
  for (const ClipData& clip : clips) {
    const Tensor traits = model.forward(clip, /*training=*/false, rng);
    double clip_mse = 0.0;
    for (std::size_t i = 0; i < kTraitCount; ++i) {
      const double diff = traits[i] - clip.labels[i];
      abs_err[i] += std::abs(diff);
      clip_mse += diff * diff;
    }
    mse += clip_mse / static_cast<double>(kTraitCount);
  }
  const double inv = 1.0 / static_cast<double>(clips.size());
  for (double& e : abs_err) e *= inv;
  return metrics_from_mae(abs_err, mse * inv);
}

TraitVector baseline_train_mean(const std::vector<ClipData>& train_clips) {
  if (train_clips.empty()) throw ValidationError("baseline: empty training set");
  TraitVector mean{};
  for (const ClipData& clip : train_clips) {
    for (std::size_t i = 0; i < kTraitCount; ++i) mean[i] += clip.labels[i];
  }
  for (double& m : mean) m /= static_cast<double>(train_clips.size());
  return mean;
}

Metrics evaluate_constant(const TraitVector& prediction, const std::vector<ClipData>& clips) {
  if (clips.empty()) throw ValidationError("evaluate: empty record list");
  TraitVector abs_err{};
  double mse = 0.0;
  for (const ClipData& clip : clips) {
    double clip_mse = 0.0;
    for (std::size_t i = 0; i < kTraitCount; ++i) {
      const double diff = prediction[i] - clip.labels[i];
      abs_err[i] += std::abs(diff);
      clip_mse += diff * diff;
    }
    mse += clip_mse / static_cast<double>(kTraitCount);
  }
  const double inv = 1.0 / static_cast<double>(clips.size());
  for (double& e : abs_err) e *= inv;
  return metrics_from_mae(abs_err, mse * inv);
}

void write_history_tsv(const std::filesystem::path& path, const TrainHistory& history) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write history to " + path.string());
  out << "epoch\ttrain_mse\tval_mse\tbest\n";
  char buf[64];
  for (const EpochStats& e : history.epochs) {
    std::snprintf(buf, sizeof buf, "%zu\t%.10f\t%.10f\t%d\n", e.epoch, e.train_mse, e.val_mse,
                  e.best ? 1 : 0);
    out << buf;
  }
  out << "# best_epoch=" << history.best_epoch << " steps=" << history.steps
      << " stop=" << history.stop_reason << "\n";
}

}  // namespace trimodal
