#include <benchmark/benchmark.h>

#include "trimodal/fusion.hpp"

namespace {

using namespace trimodal;

PredictionSet make_devset(std::size_t n) {
  Rng rng(6);
  PredictionSet devset;
  devset.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    PredictionRecord record;
    record.clip_id = "bench" + std::to_string(i);
    for (auto& modality : record.preds) {
      for (double& v : modality) v = rng.uniform(0.0, 1.0);
    }
    for (std::size_t t = 0; t < kTraitCount; ++t) {
      record.labels[t] = std::clamp(
          0.5 * record.preds[0][t] + 0.3 * record.preds[1][t] + 0.2 * record.preds[2][t] +
              0.01 * rng.normal(),
          0.0, 1.0);
    }
    devset.push_back(record);
  }
  return devset;
}

void BM_DlfFit(benchmark::State& state) {
  const PredictionSet devset = make_devset(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    DlfFitResult result = dlf_fit(devset);
    benchmark::DoNotOptimize(result.objective.data());
  }
}
BENCHMARK(BM_DlfFit)->Arg(50)->Arg(200)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
