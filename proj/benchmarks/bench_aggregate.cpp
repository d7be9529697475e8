#include <benchmark/benchmark.h>

#include "fedsim/model.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/strategy_ops.hpp"

namespace {

using namespace fedsim;

std::vector<ClientUpdate> updates(std::size_t clients) {
  Rng rng(3);
  std::vector<ClientUpdate> out;
  for (std::size_t i = 0; i < clients; ++i) {
    ClientUpdate u;
    u.client_id = static_cast<int>(i);
    u.params = FlatParams(kStandardParamCount);
    for (double& v : u.params.values) v = rng.uniform(-1.0, 1.0);
    u.num_train_samples = 100 + rng.below(10000);
    u.local_val_accuracy = rng.uniform();
    out.push_back(std::move(u));
  }
  return out;
}

void BM_FedAvgAggregate(benchmark::State& state) {
  const auto ups = updates(6);
  const FlatParams global(kStandardParamCount, 0.1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fedavg_aggregate(global, ups));
  }
}
BENCHMARK(BM_FedAvgAggregate);

void BM_DaflAggregate(benchmark::State& state) {
  const auto ups = updates(12);
  for (auto _ : state) {
    benchmark::DoNotOptimize(dafl_aggregate(ups));
  }
}
BENCHMARK(BM_DaflAggregate);

}  // namespace
