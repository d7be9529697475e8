#pragma once

#include <cstdint>

#include "fedsim/dataset.hpp"
#include "fedsim/model.hpp"

namespace fedsim {

// Binary classification counts and derived scores. f1 is 0 whenever
// precision + recall is 0.
struct EvalMetrics {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double accuracy = 0.0;
  double mean_loss = 0.0;
};

// Evaluates the model on a split at threshold 0.5; a prediction of exactly
// 0.5 counts as attack. mean_loss is the BCE.
EvalMetrics evaluate(const MlpModel& model, const LabeledSet& split);

}  // namespace fedsim
