#include "fedsim/model.hpp"

#include <cmath>
#include <stdexcept>

#include "fedsim/rng.hpp"

namespace fedsim {

std::size_t MlpModel::param_count() const {
  std::size_t n = 0;
  for (const auto& layer : layers) n += layer.param_count();
  return n;
}

std::vector<std::size_t> MlpModel::layer_offsets() const {
  std::vector<std::size_t> offsets;
  offsets.reserve(layers.size());
  std::size_t n = 0;
  for (const auto& layer : layers) {
    offsets.push_back(n);
    n += layer.param_count();
  }
  return offsets;
}

MlpModel make_model(const std::vector<std::size_t>& widths,
                    const std::vector<Activation>& activations,
                    std::uint64_t seed) {
  if (widths.size() < 2 || activations.size() != widths.size() - 1) {
    throw std::invalid_argument("make_model: need n+1 widths for n activations");
  }
  Rng rng(mix_seed({seed, 0x6d6f64656cULL}));
  MlpModel model;
  model.layers.resize(widths.size() - 1);
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    DenseLayer& layer = model.layers[l];
    const std::size_t fan_in = widths[l];
    const std::size_t fan_out = widths[l + 1];
    layer.weights = Matrix(fan_in, fan_out);
    layer.bias.assign(fan_out, 0.0);
    layer.activation = activations[l];
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (double& w : layer.weights.data()) {
      w = rng.uniform(-bound, bound);
    }
  }
  return model;
}

MlpModel init_model(std::uint64_t seed) {
  return make_model({kInputDim, 32, 32, 1},
                    {Activation::kRelu, Activation::kRelu, Activation::kSigmoid},
                    seed);
}

namespace {

// out(rows x fan_out) = in(rows x fan_in) * W(fan_in x fan_out) + bias
void affine(const Matrix& in, const DenseLayer& layer, Matrix& out) {
  const std::size_t rows = in.rows();
  const std::size_t fan_in = layer.fan_in();
  const std::size_t fan_out = layer.fan_out();
  out = Matrix(rows, fan_out);
  const double* w = layer.weights.data().data();
  for (std::size_t r = 0; r < rows; ++r) {
    double* o = out.data().data() + r * fan_out;
    for (std::size_t j = 0; j < fan_out; ++j) o[j] = layer.bias[j];
    const double* x = in.data().data() + r * fan_in;
    for (std::size_t k = 0; k < fan_in; ++k) {
      const double xk = x[k];
      const double* wk = w + k * fan_out;
      for (std::size_t j = 0; j < fan_out; ++j) o[j] += xk * wk[j];
    }
  }
}

void activate(Matrix& m, Activation act) {
  if (act == Activation::kRelu) {
    for (double& v : m.data()) v = v > 0.0 ? v : 0.0;
  } else {
    for (double& v : m.data()) v = 1.0 / (1.0 + std::exp(-v));
  }
}

}  // namespace

ForwardTrace forward_trace(const MlpModel& model, const Matrix& batch) {
  if (batch.cols() != model.input_dim()) {
    throw std::invalid_argument("forward: batch has " + std::to_string(batch.cols()) +
                                " columns, model expects " +
                                std::to_string(model.input_dim()));
  }
  ForwardTrace trace;
  trace.pre.resize(model.layers.size());
  trace.post.resize(model.layers.size());
  const Matrix* in = &batch;
  for (std::size_t l = 0; l < model.layers.size(); ++l) {
    affine(*in, model.layers[l], trace.pre[l]);
    trace.post[l] = trace.pre[l];
    activate(trace.post[l], model.layers[l].activation);
    in = &trace.post[l];
  }
  return trace;
}

std::vector<double> forward(const MlpModel& model, const Matrix& batch) {
  ForwardTrace trace = forward_trace(model, batch);
  const Matrix& out = trace.post.back();
  std::vector<double> preds(out.rows());
  for (std::size_t r = 0; r < out.rows(); ++r) preds[r] = out.at(r, 0);
  return preds;
}

FlatParams flatten(const MlpModel& model) {
  FlatParams flat;
  flat.values.reserve(model.param_count());
  for (const auto& layer : model.layers) {
    flat.values.insert(flat.values.end(), layer.weights.data().begin(),
                       layer.weights.data().end());
    flat.values.insert(flat.values.end(), layer.bias.begin(), layer.bias.end());
  }
  return flat;
}

void unflatten(const FlatParams& params, MlpModel& model) {
  if (params.size() != model.param_count()) {
    throw std::invalid_argument("unflatten: expected " +
                                std::to_string(model.param_count()) +
                                " values, got " + std::to_string(params.size()));
  }
  std::size_t pos = 0;
  for (auto& layer : model.layers) {
    const std::size_t w = layer.weights.data().size();
    std::copy(params.values.begin() + pos, params.values.begin() + pos + w,
              layer.weights.data().begin());
    pos += w;
    std::copy(params.values.begin() + pos, params.values.begin() + pos + layer.bias.size(),
              layer.bias.begin());
    pos += layer.bias.size();
  }
}

}  // namespace fedsim
