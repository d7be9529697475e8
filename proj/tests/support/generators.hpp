#pragma once

// Small random-instance generators and a property runner shared by the unit
// suites and the standalone acceptance binary.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/model.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/strategy_ops.hpp"

namespace fedsim::test {

struct PropResult {
  int cases = 0;
  int failures = 0;
  std::string first_failure;

  bool ok() const { return failures == 0; }
};

// Runs `cases` seeded instances of fn; fn returns a failure message or
// nothing. Keeps counting after a failure so the tally is informative.
inline PropResult run_property(int cases, std::uint64_t seed,
                               const std::function<std::optional<std::string>(Rng&)>& fn) {
  PropResult result;
  for (int i = 0; i < cases; ++i) {
    Rng rng(mix_seed({seed, static_cast<std::uint64_t>(i)}));
    ++result.cases;
    const auto failure = fn(rng);
    if (failure.has_value()) {
      ++result.failures;
      if (result.first_failure.empty()) {
        result.first_failure = "case " + std::to_string(i) + ": " + *failure;
      }
    }
  }
  return result;
}

// A small random model ending in one sigmoid unit; hidden widths 2..6.
inline MlpModel random_small_model(Rng& rng) {
  const std::size_t depth = 1 + rng.below(3);
  std::vector<std::size_t> widths = {2 + rng.below(5)};
  std::vector<Activation> acts;
  for (std::size_t l = 0; l + 1 < depth; ++l) {
    widths.push_back(2 + rng.below(5));
    acts.push_back(Activation::kRelu);
  }
  widths.push_back(1);
  acts.push_back(Activation::kSigmoid);
  return make_model(widths, acts, rng.next_u64());
}

inline Matrix random_batch(Rng& rng, std::size_t rows, std::size_t cols) {
  Matrix m(rows, cols);
  for (double& v : m.data()) v = rng.uniform(-1.0, 1.0);
  return m;
}

inline std::vector<int> random_labels(Rng& rng, std::size_t rows) {
  std::vector<int> labels(rows);
  for (int& y : labels) y = rng.below(2) == 0 ? 0 : 1;
  return labels;
}

// Central differences are meaningless across a ReLU kink or a saturated
// sigmoid, so gradient checks reject instances whose pre-activations sit
// near one.
inline bool gradcheck_safe(const MlpModel& model, const Matrix& batch,
                           double margin = 1e-3) {
  const ForwardTrace trace = forward_trace(model, batch);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    const bool relu = model.layers[l].activation == Activation::kRelu;
    for (double z : trace.pre[l].data()) {
      if (relu && std::abs(z) < margin) return false;
      if (!relu && std::abs(z) > 15.0) return false;
    }
  }
  return true;
}

struct GradcheckInstance {
  MlpModel model;
  Matrix batch;
  std::vector<int> labels;
};

inline GradcheckInstance gradcheck_instance(Rng& rng, std::size_t rows) {
  for (;;) {
    MlpModel model = random_small_model(rng);
    Matrix batch = random_batch(rng, rows, model.input_dim());
    if (!gradcheck_safe(model, batch)) continue;
    return {std::move(model), std::move(batch), random_labels(rng, rows)};
  }
}

inline FlatParams random_params(Rng& rng, std::size_t n, double scale = 1.0) {
  FlatParams p(n);
  for (double& v : p.values) v = rng.uniform(-scale, scale);
  return p;
}

// Random aggregation instance: a handful of clients with toy-sized vectors.
struct AggInstance {
  FlatParams global;
  FlatParams prev_global;
  std::vector<ClientUpdate> updates;
};

inline AggInstance random_agg_instance(Rng& rng) {
  AggInstance inst;
  const std::size_t dim = 1 + rng.below(8);
  const std::size_t clients = 1 + rng.below(6);
  inst.global = random_params(rng, dim);
  inst.prev_global = random_params(rng, dim);
  for (std::size_t i = 0; i < clients; ++i) {
    ClientUpdate u;
    u.client_id = static_cast<int>(i);
    u.params = random_params(rng, dim);
    u.num_train_samples = 1 + rng.below(1000);
    u.local_val_accuracy = rng.uniform();
    u.local_val_loss = rng.uniform(0.01, 2.0);
    u.global_val_loss = rng.uniform(0.01, 2.0);
    inst.updates.push_back(std::move(u));
  }
  return inst;
}

}  // namespace fedsim::test
