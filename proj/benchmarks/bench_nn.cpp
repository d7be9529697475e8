#include <benchmark/benchmark.h>

#include "fedsim/model.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/train.hpp"

namespace {

using namespace fedsim;

Matrix random_batch(std::size_t rows) {
  Rng rng(7);
  Matrix m(rows, kInputDim);
  for (double& v : m.data()) v = rng.uniform();
  return m;
}

std::vector<int> random_labels(std::size_t rows) {
  Rng rng(8);
  std::vector<int> labels(rows);
  for (int& y : labels) y = static_cast<int>(rng.below(2));
  return labels;
}

void BM_Forward(benchmark::State& state) {
  const MlpModel model = init_model(1);
  const Matrix batch = random_batch(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(forward(model, batch));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Forward)->Arg(256)->Arg(1024);

void BM_Backward(benchmark::State& state) {
  const MlpModel model = init_model(1);
  const std::size_t rows = static_cast<std::size_t>(state.range(0));
  const Matrix batch = random_batch(rows);
  const std::vector<int> labels = random_labels(rows);
  for (auto _ : state) {
    benchmark::DoNotOptimize(backward(model, batch, labels, GradModifier::none()));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Backward)->Arg(256)->Arg(1024);

void BM_MbgdEpoch(benchmark::State& state) {
  const MlpModel model = init_model(1);
  LabeledSet train;
  train.features = random_batch(4096);
  train.labels = random_labels(4096);
  for (auto _ : state) {
    Rng rng(5);
    benchmark::DoNotOptimize(
        mbgd_train(model, train, 1, 4, 1024, 0.1, GradModifier::none(), rng));
  }
  state.SetItemsProcessed(state.iterations() * 4096);
}
BENCHMARK(BM_MbgdEpoch);

}  // namespace
