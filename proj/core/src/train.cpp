#include "fedsim/train.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace fedsim {

namespace {
constexpr double kProbClamp = 1e-7;

double clamp_prob(double p) {
  if (p < kProbClamp) return kProbClamp;
  if (p > 1.0 - kProbClamp) return 1.0 - kProbClamp;
  return p;
}
}  // namespace

GradModifier GradModifier::proximal(double lambda, FlatParams anchor) {
  GradModifier m;
  m.kind_ = Kind::kProximal;
  m.lambda_ = lambda;
  m.a_ = std::move(anchor);
  return m;
}

GradModifier GradModifier::variate_correction(FlatParams c_global, FlatParams c_local) {
  GradModifier m;
  m.kind_ = Kind::kVariateCorrection;
  m.a_ = std::move(c_global);
  m.b_ = std::move(c_local);
  return m;
}

GradModifier GradModifier::additive(FlatParams term, double lambda) {
  GradModifier m;
  m.kind_ = Kind::kAdditive;
  m.lambda_ = lambda;
  m.a_ = std::move(term);
  return m;
}

void GradModifier::apply(const FlatParams& current, FlatParams& grad) const {
  switch (kind_) {
    case Kind::kNone:
      return;
    case Kind::kProximal:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] += lambda_ * (current[i] - a_[i]);
      }
      return;
    case Kind::kVariateCorrection:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] += a_[i] - b_[i];
      }
      return;
    case Kind::kAdditive:
      for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] += lambda_ * a_[i];
      }
      return;
  }
}

double GradModifier::penalty(const FlatParams& current) const {
  double s = 0.0;
  switch (kind_) {
    case Kind::kNone:
      return 0.0;
    case Kind::kProximal:
      for (std::size_t i = 0; i < current.size(); ++i) {
        const double d = current[i] - a_[i];
        s += d * d;
      }
      return 0.5 * lambda_ * s;
    case Kind::kVariateCorrection:
      for (std::size_t i = 0; i < current.size(); ++i) {
        s += (a_[i] - b_[i]) * current[i];
      }
      return s;
    case Kind::kAdditive:
      for (std::size_t i = 0; i < current.size(); ++i) {
        s += a_[i] * current[i];
      }
      return lambda_ * s;
  }
  return 0.0;
}

double bce_loss(const std::vector<double>& predictions, const std::vector<int>& labels) {
  if (predictions.size() != labels.size()) {
    throw std::invalid_argument("bce_loss: prediction/label length mismatch");
  }
  if (predictions.empty()) {
    throw std::invalid_argument("bce_loss: empty input");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const double p = clamp_prob(predictions[i]);
    sum += labels[i] != 0 ? -std::log(p) : -std::log(1.0 - p);
  }
  return sum / static_cast<double>(predictions.size());
}

FlatParams backward(const MlpModel& model, const Matrix& batch,
                    const std::vector<int>& labels, const GradModifier& modifier) {
  if (batch.rows() != labels.size()) {
    throw std::invalid_argument("backward: batch/label row mismatch");
  }
  if (model.layers.empty() || model.layers.back().fan_out() != 1 ||
      model.layers.back().activation != Activation::kSigmoid) {
    throw std::invalid_argument("backward: BCE needs a single sigmoid output");
  }
  const std::size_t n = batch.rows();
  const std::size_t num_layers = model.layers.size();
  ForwardTrace trace = forward_trace(model, batch);

  // Output layer: dL/dz for mean BCE through a sigmoid is (p - y)/n. The
  // clamp only flattens the loss where the sigmoid is already saturated.
  Matrix delta(n, 1);
  for (std::size_t r = 0; r < n; ++r) {
    const double p = trace.post.back().at(r, 0);
    const double y = labels[r] != 0 ? 1.0 : 0.0;
    if (p < kProbClamp || p > 1.0 - kProbClamp) {
      delta.at(r, 0) = 0.0;
    } else {
      delta.at(r, 0) = (p - y) / static_cast<double>(n);
    }
  }

  FlatParams grad(model.param_count());
  const std::vector<std::size_t> offsets = model.layer_offsets();

  for (std::size_t li = num_layers; li-- > 0;) {
    const DenseLayer& layer = model.layers[li];
    const std::size_t fan_in = layer.fan_in();
    const std::size_t fan_out = layer.fan_out();
    const Matrix& input = li == 0 ? batch : trace.post[li - 1];

    // Weight and bias gradients: dW = input^T * delta, db = column sums.
    double* gw = grad.values.data() + offsets[li];
    double* gb = gw + fan_in * fan_out;
    for (std::size_t r = 0; r < n; ++r) {
      const double* x = input.data().data() + r * fan_in;
      const double* d = delta.data().data() + r * fan_out;
      for (std::size_t k = 0; k < fan_in; ++k) {
        const double xk = x[k];
        if (xk == 0.0) continue;
        double* gwk = gw + k * fan_out;
        for (std::size_t j = 0; j < fan_out; ++j) gwk[j] += xk * d[j];
      }
      for (std::size_t j = 0; j < fan_out; ++j) gb[j] += d[j];
    }

    if (li == 0) break;

    // Propagate: delta_prev = (delta * W^T) ⊙ act'(z_prev).
    Matrix prev(n, fan_in);
    const double* w = layer.weights.data().data();
    for (std::size_t r = 0; r < n; ++r) {
      const double* d = delta.data().data() + r * fan_out;
      double* pd = prev.data().data() + r * fan_in;
      for (std::size_t k = 0; k < fan_in; ++k) {
        const double* wk = w + k * fan_out;
        double s = 0.0;
        for (std::size_t j = 0; j < fan_out; ++j) s += wk[j] * d[j];
        pd[k] = s;
      }
    }
    const DenseLayer& below = model.layers[li - 1];
    if (below.activation == Activation::kRelu) {
      for (std::size_t i = 0; i < prev.data().size(); ++i) {
        if (trace.pre[li - 1].data()[i] <= 0.0) prev.data()[i] = 0.0;
      }
    } else {
      for (std::size_t i = 0; i < prev.data().size(); ++i) {
        const double a = trace.post[li - 1].data()[i];
        prev.data()[i] *= a * (1.0 - a);
      }
    }
    delta = std::move(prev);
  }

  if (modifier.kind() != GradModifier::Kind::kNone) {
    modifier.apply(flatten(model), grad);
  }
  return grad;
}

int default_steps_per_epoch(std::size_t train_size, int batch_size) {
  if (batch_size < 1) throw std::invalid_argument("batch_size must be >= 1");
  const std::size_t b = static_cast<std::size_t>(batch_size);
  return static_cast<int>(std::max<std::size_t>(1, (train_size + b - 1) / b));
}

TrainResult mbgd_train(const MlpModel& model, const LabeledSet& train, int epochs,
                       int steps_per_epoch, int batch_size, double lr,
                       const GradModifier& modifier, Rng& rng) {
  if (train.empty()) throw std::invalid_argument("mbgd_train: empty dataset");
  if (epochs < 0) throw std::invalid_argument("mbgd_train: negative epochs");
  if (steps_per_epoch < 1 || batch_size < 1) {
    throw std::invalid_argument("mbgd_train: steps_per_epoch and batch_size must be >= 1");
  }

  TrainResult result;
  result.model = model;
  if (epochs == 0) return result;

  const std::size_t n = train.size();
  const std::size_t dim = train.features.cols();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);

  Matrix batch(static_cast<std::size_t>(batch_size), dim);
  std::vector<int> labels(static_cast<std::size_t>(batch_size));

  for (int e = 0; e < epochs; ++e) {
    rng.shuffle(order);
    std::size_t cursor = 0;  // wraps within the epoch's shuffled order
    for (int s = 0; s < steps_per_epoch; ++s) {
      for (int r = 0; r < batch_size; ++r) {
        const std::size_t idx = order[cursor];
        cursor = (cursor + 1) % n;
        auto src = train.features.row(idx);
        std::copy(src.begin(), src.end(), batch.row(static_cast<std::size_t>(r)).begin());
        labels[static_cast<std::size_t>(r)] = train.labels[idx];
      }
      FlatParams grad = backward(result.model, batch, labels, modifier);
      FlatParams params = flatten(result.model);
      params.axpy(-lr, grad);
      unflatten(params, result.model);
      ++result.num_updates;
    }
  }
  return result;
}

}  // namespace fedsim
