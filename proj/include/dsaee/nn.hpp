#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "dsaee/types.hpp"

// Dense feed-forward sparse autoencoder: an encoder stack, an L1 activity
// penalty on the innermost code layer and a decoder stack reconstructing the
// input. Trained by mini-batch Adam. All arithmetic is double precision.
namespace dsaee::nn {

enum class Activation { kTanh, kRelu, kSigmoid, kLinear };

std::string_view to_string(Activation activation);

// Accepts "tanh", "relu", "sigmoid", "linear" (case-insensitive).
Activation parse_activation(std::string_view name);

struct LayerSpec {
  std::size_t input_width = 0;
  std::size_t output_width = 0;
  Activation activation = Activation::kLinear;
};

struct DsaeConfig {
  std::vector<LayerSpec> encoder_layers;
  std::vector<LayerSpec> decoder_layers;
  // Weight of the L1 penalty on the code activations.
  double lambda = 1e-5;
  // Index (into the combined encoder+decoder stack) of the penalized layer;
  // always the last encoder layer.
  std::size_t code_layer_index = 0;
  std::uint64_t seed = 0;

  std::size_t input_width() const;
  std::size_t num_layers() const;
  // k-th layer of the combined encoder+decoder stack.
  const LayerSpec& layer(std::size_t k) const;

  // Throws UsageError when widths do not chain, the network does not map J
  // features back to J, lambda is negative or the code index is wrong.
  void validate() const;

  // Builds a config from architecture strings of the form used in model
  // tables: `encoder_widths` starts with the input width (e.g. 178-132-64-32)
  // and `decoder_widths` lists each decoder layer's output width
  // (e.g. 64-132-178). Each activation list holds either a single entry,
  // applied to every layer of that half, or one entry per layer.
  static DsaeConfig from_widths(std::span<const std::size_t> encoder_widths,
                                std::span<const Activation> encoder_activations,
                                std::span<const std::size_t> decoder_widths,
                                std::span<const Activation> decoder_activations,
                                double lambda, std::uint64_t seed);
};

struct Layer {
  Matrix weights;  // output_width x input_width
  Vector bias;     // output_width
  Activation activation = Activation::kLinear;
};

class DsaeModel {
 public:
  // Glorot-uniform weights in +-sqrt(6 / (fan_in + fan_out)), zero biases,
  // drawn from a stream derived from config.seed.
  static DsaeModel initialize(const DsaeConfig& config);

  // Takes explicit parameters; throws UsageError on shape mismatch.
  DsaeModel(DsaeConfig config, std::vector<Layer> layers);

  const DsaeConfig& config() const { return config_; }
  std::span<const Layer> layers() const { return layers_; }
  std::span<Layer> layers() { return layers_; }

  std::size_t input_width() const { return config_.input_width(); }
  std::size_t parameter_count() const;
  bool all_finite() const;

 private:
  DsaeConfig config_;
  std::vector<Layer> layers_;
};

// Activations of every layer for one batch; enough to run backprop.
struct ForwardPass {
  // activations[0] is the input batch, activations[k + 1] the output of
  // layer k.
  std::vector<Matrix> activations;
  std::size_t code_layer_index = 0;

  const Matrix& reconstruction() const { return activations.back(); }
  const Matrix& code() const { return activations[code_layer_index + 1]; }
};

// Throws UsageError on a column-count mismatch and NumericError naming the
// layer when an activation becomes non-finite.
ForwardPass forward(const DsaeModel& model, const Matrix& batch);

struct LossBreakdown {
  double total = 0.0;
  // Mean over rows and features of the squared reconstruction error.
  double mse = 0.0;
  // lambda times the mean over rows of the L1 norm of the code activation.
  double penalty = 0.0;
};

LossBreakdown loss_with_penalty(const DsaeModel& model, const Matrix& batch);
LossBreakdown loss_from_pass(const DsaeModel& model, const Matrix& batch,
                             const ForwardPass& pass);

struct Gradients {
  std::vector<Matrix> weights;
  std::vector<Vector> biases;
};

// Gradient of loss_with_penalty with respect to every weight and bias.
// The L1 subgradient and the relu derivative are taken as 0 at 0.
Gradients backward(const DsaeModel& model, const Matrix& batch,
                   const ForwardPass& pass);

struct TrainingConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 100;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;

  void validate() const;
};

struct AdamState {
  std::vector<Matrix> first_w;
  std::vector<Matrix> second_w;
  std::vector<Vector> first_b;
  std::vector<Vector> second_b;
  std::uint64_t step = 0;

  static AdamState zeros_like(const DsaeModel& model);
};

// One bias-corrected Adam update; increments state.step.
void adam_step(DsaeModel& model, const Gradients& gradients, AdamState& state,
               const TrainingConfig& config);

struct TrainResult {
  DsaeModel model;
  // Per-epoch row-weighted average of the mini-batch losses.
  std::vector<LossBreakdown> history;
};

// Shuffled mini-batch training. The shuffle stream is derived from the
// model's config seed, so the result is a pure function of its inputs. The
// trailing partial batch is kept; a batch size above the row count is
// clamped with a warning.
TrainResult train(DsaeModel model, const Matrix& data,
                  const TrainingConfig& config);

// Element-wise squared difference between each row and its reconstruction.
Matrix reconstruction_errors(const DsaeModel& model, const Matrix& data);

}  // namespace dsaee::nn
