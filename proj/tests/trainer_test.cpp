#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <limits>
#include <cstring>

#include "doctest.h"
#include "trimodal/errors.hpp"
#include "trimodal/ops.hpp"
#include "trimodal/trainer.hpp"
#include "trimodal/video_channel.hpp"

using namespace trimodal;

namespace {

// A weightless model whose prediction is a fixed function of the clip id;
// keeps trainer tests independent of the channels.
class StubModel final : public TraitModel {
 public:
  explicit StubModel(TraitVector constant) : constant_(constant) {
    params_.emplace_back("stub.bias", Tensor({1}));
  }

  std::string kind() const override { return "stub"; }

  Tensor forward(const ClipData&, bool, Rng&) override {
    Tensor pred({kTraitCount}, std::vector<double>(constant_.begin(), constant_.end()));
    return pred;
  }

  std::vector<Parameter*> parameters() override { return {&params_[0]}; }
  std::map<std::string, std::string> config_map() const override { return {}; }

 private:
  TraitVector constant_;
  std::vector<Parameter> params_;
};

ClipData feature_clip(std::uint64_t seed, const TraitVector& labels) {
  Rng rng(seed);
  ClipData clip;
  clip.clip_id = "t" + std::to_string(seed);
  clip.features = FeatureVector{};
  clip.features->values.resize(64);
  for (double& v : clip.features->values) v = rng.uniform(-1.0, 1.0);
  clip.labels = labels;
  return clip;
}

std::vector<ClipData> feature_clips(std::size_t n, std::uint64_t seed_base) {
  Rng rng(seed_base);
  std::vector<ClipData> clips;
  for (std::size_t i = 0; i < n; ++i) {
    TraitVector labels;
    for (double& y : labels) y = rng.uniform(0.1, 0.9);
    clips.push_back(feature_clip(seed_base * 100 + i, labels));
  }
  return clips;
}

VideoChannel small_video(std::uint64_t seed) {
  VideoChannelConfig config;
  config.head_hidden_dim = 16;
  return VideoChannel(config, seed);
}

}  // namespace

TEST_CASE("reference per-trait accuracy is one minus MAE") {
  // Reference results reproduced by the metric identity; spot values from the
  // reported audio row and the best fused row.
  Metrics audio = metrics_from_mae({0.1080, 0.0953, 0.1160, 0.1077, 0.1024}, 0.0);
  CHECK(std::abs(audio.accuracy[0] - 0.8920) < 5e-5);
  CHECK(std::abs(audio.accuracy[1] - 0.9047) < 5e-5);
  CHECK(std::abs(audio.mean_mae - 0.1059) < 5e-5);
  CHECK(std::abs(audio.mean_accuracy - 0.8941) < 5e-5);

  Metrics nnfb = metrics_from_mae({0.0958, 0.0907, 0.0922, 0.0964, 0.0938}, 0.0);
  CHECK(std::abs(nnfb.mean_mae - 0.0938) < 5e-5);
  CHECK(std::abs(nnfb.mean_accuracy - 0.9062) < 5e-5);
}

TEST_CASE("perfect predictions give zero MAE, unit accuracy, zero MSE") {
  const TraitVector labels = {0.3, 0.4, 0.5, 0.6, 0.7};
  StubModel model(labels);
  std::vector<ClipData> clips = {feature_clip(1, labels), feature_clip(2, labels)};
  const Metrics metrics = evaluate(model, clips);
  for (std::size_t i = 0; i < kTraitCount; ++i) {
    CHECK(metrics.mae[i] == 0.0);
    CHECK(metrics.accuracy[i] == 1.0);
  }
  CHECK(metrics.mse == 0.0);
}

TEST_CASE("evaluate is side-effect free") {
  VideoChannel model = small_video(3);
  std::vector<ClipData> clips = feature_clips(6, 11);
  const Metrics a = evaluate(model, clips);
  const Metrics b = evaluate(model, clips);
  CHECK(a.mse == b.mse);
  CHECK(a.mean_mae == b.mean_mae);
  for (std::size_t i = 0; i < kTraitCount; ++i) CHECK(a.mae[i] == b.mae[i]);
}

TEST_CASE("evaluate MSE equals the training objective in evaluation mode") {
  VideoChannel model = small_video(5);
  std::vector<ClipData> clips = feature_clips(4, 17);
  const Metrics metrics = evaluate(model, clips);

  NoGradGuard guard;
  Rng rng(0);
  double manual = 0.0;
  for (const ClipData& clip : clips) {
    Tensor traits = model.forward(clip, false, rng);
    manual += mse_over_traits(traits, label_tensor(clip.labels)).value();
  }
  manual /= static_cast<double>(clips.size());
  CHECK(std::abs(metrics.mse - manual) < 1e-12);
}

TEST_CASE("evaluate rejects empty record lists") {
  VideoChannel model = small_video(7);
  CHECK_THROWS_AS(evaluate(model, {}), ValidationError);
}

TEST_CASE("baseline predicts the mean of the training labels") {
  std::vector<ClipData> train_set = {feature_clip(1, {0.4, 0.4, 0.4, 0.4, 0.4}),
                                 feature_clip(2, {0.6, 0.6, 0.6, 0.6, 0.6})};
  const TraitVector mean = baseline_train_mean(train_set);
  for (double m : mean) CHECK(m == doctest::Approx(0.5));

  std::vector<ClipData> test = {feature_clip(3, {0.5, 0.5, 0.5, 0.5, 0.5})};
  const Metrics metrics = evaluate_constant(mean, test);
  for (std::size_t i = 0; i < kTraitCount; ++i) CHECK(metrics.mae[i] == doctest::Approx(0.0));

  CHECK_THROWS_AS(baseline_train_mean({}), ValidationError);
}

TEST_CASE("constant training labels make the baseline MAE the test distance") {
  const TraitVector y = {0.3, 0.3, 0.3, 0.3, 0.3};
  std::vector<ClipData> train_set = {feature_clip(1, y), feature_clip(2, y)};
  std::vector<ClipData> test = {feature_clip(3, {0.8, 0.7, 0.6, 0.5, 0.4})};
  const Metrics metrics = evaluate_constant(baseline_train_mean(train_set), test);
  CHECK(metrics.mae[0] == doctest::Approx(0.5));
  CHECK(metrics.mae[1] == doctest::Approx(0.4));
  CHECK(metrics.mae[4] == doctest::Approx(0.1));
}

TEST_CASE("early stopping: patience one with no improvement stops after two epochs") {
  // A constant model never improves validation after epoch one, which makes
  // the patience rule exactly observable.
  StubModel model({0.5, 0.5, 0.5, 0.5, 0.5});
  std::vector<ClipData> train_set = feature_clips(4, 23);
  std::vector<ClipData> val_set = feature_clips(4, 29);

  TrainConfig config;
  config.batch_size = 4;
  config.max_epochs = 30;
  config.patience = 1;
  config.seed = 3;
  const TrainHistory history = train(model, train_set, val_set, config);

  REQUIRE(history.epochs.size() == 2);
  CHECK(history.best_epoch == 1);
  CHECK(history.stop_reason == "early_stop");
  CHECK(history.epochs[0].best);
  CHECK(!history.epochs[1].best);
}

TEST_CASE("training restores the best-epoch weights") {
  VideoChannel model = small_video(13);
  std::vector<ClipData> train_set = feature_clips(4, 23);
  std::vector<ClipData> val_set = feature_clips(4, 29);
  TrainConfig config;
  config.batch_size = 4;
  config.max_epochs = 10;
  config.patience = 10;
  config.lr = 0.05;
  config.seed = 3;
  const TrainHistory history = train(model, train_set, val_set, config);
  const double held = evaluate(model, val_set).mse;
  CHECK(held == doctest::Approx(history.epochs[history.best_epoch - 1].val_mse).epsilon(1e-12));
}

TEST_CASE("the returned parameters always match the best validation epoch") {
  VideoChannel model = small_video(17);
  std::vector<ClipData> train_set = feature_clips(6, 31);
  std::vector<ClipData> val_set = feature_clips(4, 37);
  TrainConfig config;
  config.batch_size = 2;
  config.max_epochs = 8;
  config.patience = 8;
  config.lr = 5e-3;
  config.seed = 4;
  const TrainHistory history = train(model, train_set, val_set, config);

  double best = std::numeric_limits<double>::infinity();
  std::size_t best_epoch = 0;
  for (const EpochStats& e : history.epochs) {
    if (e.val_mse < best) {
      best = e.val_mse;
      best_epoch = e.epoch;
    }
  }
  CHECK(history.best_epoch == best_epoch);
  CHECK(evaluate(model, val_set).mse == doctest::Approx(best).epsilon(1e-12));
}

TEST_CASE("identical seeds give identical histories and parameters") {
  auto run = [] {
    VideoChannel model = small_video(19);
    std::vector<ClipData> train_set = feature_clips(6, 41);
    std::vector<ClipData> val_set = feature_clips(3, 43);
    TrainConfig config;
    config.batch_size = 2;
    config.max_epochs = 5;
    config.patience = 5;
    config.lr = 2e-3;
    config.seed = 77;
    const TrainHistory history = train(model, train_set, val_set, config);
    std::vector<double> flat;
    for (Parameter* p : model.parameters()) {
      flat.insert(flat.end(), p->tensor.values().begin(), p->tensor.values().end());
    }
    return std::make_pair(history, flat);
  };
  const auto [history_a, params_a] = run();
  const auto [history_b, params_b] = run();
  REQUIRE(history_a.epochs.size() == history_b.epochs.size());
  for (std::size_t i = 0; i < history_a.epochs.size(); ++i) {
    CHECK(history_a.epochs[i].train_mse == history_b.epochs[i].train_mse);
    CHECK(history_a.epochs[i].val_mse == history_b.epochs[i].val_mse);
  }
  CHECK(std::memcmp(params_a.data(), params_b.data(), params_a.size() * sizeof(double)) == 0);
}

TEST_CASE("video head overfits a tiny set quickly") {
  VideoChannel model = small_video(23);
  std::vector<ClipData> clips = feature_clips(8, 47);
  TrainConfig config;
  config.batch_size = 8;
  config.max_epochs = 150;
  config.patience = 150;
  config.lr = 1e-2;
  config.seed = 5;
  train(model, clips, clips, config);
  CHECK(evaluate(model, clips).mse < 1e-3);
}

namespace {

class NanModel final : public TraitModel {
 public:
  NanModel() { params_.emplace_back("nan.bias", Tensor({1})); }
  std::string kind() const override { return "nan"; }
  Tensor forward(const ClipData&, bool, Rng&) override {
    return Tensor({kTraitCount},
                  std::vector<double>(kTraitCount, std::numeric_limits<double>::quiet_NaN()));
  }
  std::vector<Parameter*> parameters() override { return {&params_[0]}; }
  std::map<std::string, std::string> config_map() const override { return {}; }

 private:
  std::vector<Parameter> params_;
};

}  // namespace

TEST_CASE("non-finite loss aborts with the offending batch ids") {
  NanModel model;
  std::vector<ClipData> clips = feature_clips(3, 59);
  TrainConfig config;
  config.batch_size = 2;
  config.max_epochs = 2;
  config.patience = 2;
  try {
    train(model, clips, clips, config);
    FAIL("expected NumericError");
  } catch (const NumericError& e) {
    REQUIRE(!e.clip_ids().empty());
    CHECK(e.clip_ids()[0].rfind("t", 0) == 0);
  }
}

TEST_CASE("train validates its configuration and inputs") {
  VideoChannel model = small_video(29);
  std::vector<ClipData> clips = feature_clips(2, 53);
  TrainConfig config;
  config.patience = 40;
  config.max_epochs = 30;
  CHECK_THROWS_AS(train(model, clips, clips, config), ParameterError);
  TrainConfig ok;
  CHECK_THROWS_AS(train(model, {}, clips, ok), ValidationError);
  CHECK_THROWS_AS(train(model, clips, {}, ok), ValidationError);
}
