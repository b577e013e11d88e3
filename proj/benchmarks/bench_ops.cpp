#include <benchmark/benchmark.h>

#include "trimodal/ops.hpp"
#include "trimodal/rng.hpp"

namespace {

using namespace trimodal;

void BM_Conv1dForward(benchmark::State& state) {
  const std::size_t filters = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  Tensor input = Tensor::uniform({2, 16000}, -1.0, 1.0, rng);
  Tensor kernels = Tensor::uniform({filters, 2, 200}, -0.1, 0.1, rng);
  Tensor bias({filters});
  NoGradGuard guard;
  for (auto _ : state) {
    Tensor out = conv1d(input, kernels, bias, 100);
    benchmark::DoNotOptimize(out.values().data());
  }
}
BENCHMARK(BM_Conv1dForward)->Arg(64)->Arg(512);

void BM_Conv1dBackward(benchmark::State& state) {
  const std::size_t filters = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  Tensor input = Tensor::uniform({2, 16000}, -1.0, 1.0, rng);
  Tensor kernels = Tensor::uniform({filters, 2, 200}, -0.1, 0.1, rng);
  kernels.set_requires_grad(true);
  Tensor bias({filters});
  bias.set_requires_grad(true);
  for (auto _ : state) {
    kernels.zero_grad();
    bias.zero_grad();
    Tensor loss = sum(conv1d(input, kernels, bias, 100));
    backward(loss);
    benchmark::DoNotOptimize(kernels.grad().data());
  }
}
BENCHMARK(BM_Conv1dBackward)->Arg(64);

void BM_FullyConnected(benchmark::State& state) {
  Rng rng(1);
  Tensor x = Tensor::uniform({640}, -1.0, 1.0, rng);
  Tensor w = Tensor::uniform({256, 640}, -0.1, 0.1, rng);
  Tensor b({256});
  NoGradGuard guard;
  for (auto _ : state) {
    Tensor out = fully_connected(x, w, b);
    benchmark::DoNotOptimize(out.values().data());
  }
}
BENCHMARK(BM_FullyConnected);

}  // namespace
