#pragma once

#include <cstdint>
#include <vector>

#include "fedsim/dataset.hpp"
#include "fedsim/flat_params.hpp"
#include "fedsim/model.hpp"
#include "fedsim/rng.hpp"

namespace fedsim {

// Additional gradient term applied at every MBGD step. Hook for the three
// local-loss customisations: proximal regularisation, control-variate
// correction and a fixed additive term.
class GradModifier {
 public:
  enum class Kind { kNone, kProximal, kVariateCorrection, kAdditive };

  GradModifier() = default;

  static GradModifier none() { return {}; }
  // Adds lambda * (w - anchor); gradient of (lambda/2)*||w - anchor||^2.
  static GradModifier proximal(double lambda, FlatParams anchor);
  // Adds (c_global - c_local) to every step.
  static GradModifier variate_correction(FlatParams c_global, FlatParams c_local);
  // Adds lambda * term, term fixed.
  static GradModifier additive(FlatParams term, double lambda);

  Kind kind() const { return kind_; }

  // grad += modifier(current_params)
  void apply(const FlatParams& current, FlatParams& grad) const;

  // Scalar whose gradient w.r.t. the parameters equals the added term; lets
  // finite-difference oracles check modified gradients too.
  double penalty(const FlatParams& current) const;

 private:
  Kind kind_ = Kind::kNone;
  double lambda_ = 0.0;
  FlatParams a_;  // anchor / c_global / term
  FlatParams b_;  // c_local
};

// Mean binary cross-entropy. Predictions are clamped to
// [1e-7, 1 - 1e-7] before the logs.
double bce_loss(const std::vector<double>& predictions, const std::vector<int>& labels);

// Gradient of the mean BCE over the batch w.r.t. all parameters, plus the
// modifier term, as flat layer-major values.
FlatParams backward(const MlpModel& model, const Matrix& batch,
                    const std::vector<int>& labels, const GradModifier& modifier);

// ceil(|train| / batch_size), at least 1: the per-epoch step count used by
// every fixed-schedule strategy.
int default_steps_per_epoch(std::size_t train_size, int batch_size);

struct TrainResult {
  MlpModel model;
  int num_updates = 0;  // epochs * steps_per_epoch
};

// Plain mini-batch gradient descent: epochs * steps_per_epoch updates of
// w <- w - lr * g. Each epoch reshuffles the train set with the given rng and
// takes sequential batches, wrapping around when steps * batch_size exceeds
// the data. epochs == 0 returns the model unchanged.
TrainResult mbgd_train(const MlpModel& model, const LabeledSet& train, int epochs,
                       int steps_per_epoch, int batch_size, double lr,
                       const GradModifier& modifier, Rng& rng);

}  // namespace fedsim
