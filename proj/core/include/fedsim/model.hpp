#pragma once

#include <cstdint>
#include <vector>

#include "fedsim/flat_params.hpp"
#include "fedsim/matrix.hpp"

namespace fedsim {

enum class Activation { kRelu, kSigmoid };

// One fully connected layer: weights are fan_in x fan_out, row-major.
struct DenseLayer {
  Matrix weights;
  std::vector<double> bias;
  Activation activation = Activation::kRelu;

  std::size_t fan_in() const { return weights.rows(); }
  std::size_t fan_out() const { return weights.cols(); }
  std::size_t param_count() const { return weights.rows() * weights.cols() + bias.size(); }
};

// Dense feed-forward network. The intrusion-detection model is the fixed
// 110 -> 32 -> 32 -> 1 shape (ReLU, ReLU, sigmoid) over flattened 10x11
// flow samples, but the math below works for any layer stack so small
// models can be used in gradient checks.
struct MlpModel {
  std::vector<DenseLayer> layers;

  std::size_t input_dim() const { return layers.empty() ? 0 : layers.front().fan_in(); }
  std::size_t param_count() const;

  // Offset of each layer's parameter block inside the flat vector.
  std::vector<std::size_t> layer_offsets() const;
};

// Flow sample geometry: 10 packets x 11 per-packet features.
inline constexpr std::size_t kPacketsPerSample = 10;
inline constexpr std::size_t kFeaturesPerPacket = 11;
inline constexpr std::size_t kInputDim = kPacketsPerSample * kFeaturesPerPacket;

// Parameter count of the standard model: 110*32+32 + 32*32+32 + 32+1.
inline constexpr std::size_t kStandardParamCount = 4641;

// Builds a model with the given layer widths (first entry is the input
// dimension) and one activation per layer. Weights are Glorot-uniform in
// +-sqrt(6/(fan_in+fan_out)), biases zero. Same seed, same model.
MlpModel make_model(const std::vector<std::size_t>& widths,
                    const std::vector<Activation>& activations,
                    std::uint64_t seed);

// The standard 110 -> 32 -> 32 -> 1 intrusion-detection MLP.
MlpModel init_model(std::uint64_t seed);

// Batch forward pass. batch is samples x input_dim; returns one prediction
// per row, each in (0, 1) for a sigmoid head.
std::vector<double> forward(const MlpModel& model, const Matrix& batch);

// Forward pass that also keeps per-layer pre-activations and activations
// for backpropagation.
struct ForwardTrace {
  std::vector<Matrix> pre;   // z_l, one per layer
  std::vector<Matrix> post;  // a_l = act(z_l), one per layer
};
ForwardTrace forward_trace(const MlpModel& model, const Matrix& batch);

FlatParams flatten(const MlpModel& model);
void unflatten(const FlatParams& params, MlpModel& model);

}  // namespace fedsim
