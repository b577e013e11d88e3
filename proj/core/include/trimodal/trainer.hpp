#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "trimodal/clip.hpp"
#include "trimodal/model.hpp"

namespace trimodal {

struct TrainConfig {
  std::size_t batch_size = 8;
  std::size_t max_epochs = 30;
  std::size_t patience = 5;  // epochs without validation improvement
  double lr = 1e-3;
  std::uint64_t seed = 1;
  bool shuffle = true;

  void validate() const;
};

struct Metrics {
  TraitVector mae{};
  double mean_mae = 0.0;
  TraitVector accuracy{};  // 1 - MAE per trait
  double mean_accuracy = 0.0;
  double mse = 0.0;
};

// Derives the full metric set from per-trait MAE (accuracy = 1 - MAE).
Metrics metrics_from_mae(const TraitVector& mae, double mse);

struct EpochStats {
  std::size_t epoch = 0;  // 1-based
  double train_mse = 0.0;
  double val_mse = 0.0;
  bool best = false;
};

struct TrainHistory {
  std::vector<EpochStats> epochs;
  std::size_t best_epoch = 0;  // 1-based
  std::size_t steps = 0;       // optimizer steps taken
  std::string stop_reason;     // "early_stop" or "max_epochs"
};

// Minimizes the five-trait MSE with Adam on seeded shuffled mini-batches.
// Validation runs in evaluation mode after each epoch; training stops when
// validation MSE fails to improve for `patience` epochs, and the model is
// left holding the best-validation-epoch parameters.
TrainHistory train(TraitModel& model, const std::vector<ClipData>& train_clips,
                   const std::vector<ClipData>& val_clips, const TrainConfig& config);

// Evaluation-mode metrics: per-trait MAE, accuracy = 1 - MAE, and the same
// MSE the training objective computes.
Metrics evaluate(TraitModel& model, const std::vector<ClipData>& clips);

// Constant predictor from the per-trait mean of the training labels.
TraitVector baseline_train_mean(const std::vector<ClipData>& train_clips);
Metrics evaluate_constant(const TraitVector& prediction, const std::vector<ClipData>& clips);

void write_history_tsv(const std::filesystem::path& path, const TrainHistory& history);

Tensor label_tensor(const TraitVector& labels);

}  // namespace trimodal
