#include "dsaee/nn.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

#include "dsaee/error.hpp"
#include "dsaee/log.hpp"
#include "dsaee/random.hpp"

namespace dsaee::nn {
namespace {

void apply_activation(Activation activation, Matrix& z) {
  switch (activation) {
    case Activation::kTanh:
      z = z.array().tanh().matrix();
      break;
    case Activation::kRelu:
      z = z.array().max(0.0).matrix();
      break;
    case Activation::kSigmoid:
      z = (1.0 / (1.0 + (-z.array()).exp())).matrix();
      break;
    case Activation::kLinear:
      break;
  }
}

// Multiplies `grad` in place by f'(z), expressed through the layer output
// h = f(z).
void scale_by_derivative(Activation activation, const Matrix& h, Matrix& grad) {
  switch (activation) {
    case Activation::kTanh:
      grad.array() *= 1.0 - h.array().square();
      break;
    case Activation::kRelu:
      grad.array() *= (h.array() > 0.0).cast<double>();
      break;
    case Activation::kSigmoid:
      grad.array() *= h.array() * (1.0 - h.array());
      break;
    case Activation::kLinear:
      break;
  }
}

void check_columns(const DsaeModel& model, const Matrix& batch) {
  if (static_cast<std::size_t>(batch.cols()) != model.input_width()) {
    throw UsageError("input has " + std::to_string(batch.cols()) +
                     " columns but the model expects " +
                     std::to_string(model.input_width()));
  }
}

}  // namespace

std::string_view to_string(Activation activation) {
  switch (activation) {
    case Activation::kTanh:
      return "tanh";
    case Activation::kRelu:
      return "relu";
    case Activation::kSigmoid:
      return "sigmoid";
    case Activation::kLinear:
      return "linear";
  }
  return "unknown";
}

Activation parse_activation(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "tanh") return Activation::kTanh;
  if (lower == "relu") return Activation::kRelu;
  if (lower == "sigmoid") return Activation::kSigmoid;
  if (lower == "linear") return Activation::kLinear;
  throw UsageError("unknown activation '" + std::string(name) +
                   "' (expected tanh, relu, sigmoid or linear)");
}

std::size_t DsaeConfig::input_width() const {
  return encoder_layers.empty() ? 0 : encoder_layers.front().input_width;
}

std::size_t DsaeConfig::num_layers() const {
  return encoder_layers.size() + decoder_layers.size();
}

const LayerSpec& DsaeConfig::layer(std::size_t k) const {
  return k < encoder_layers.size() ? encoder_layers[k]
                                   : decoder_layers[k - encoder_layers.size()];
}

void DsaeConfig::validate() const {
  if (encoder_layers.empty() || decoder_layers.empty()) {
    throw UsageError("autoencoder needs at least one encoder and one decoder layer");
  }
  for (std::size_t k = 0; k < num_layers(); ++k) {
    const LayerSpec& spec = layer(k);
    if (spec.input_width == 0 || spec.output_width == 0) {
      throw UsageError("layer " + std::to_string(k) + " has zero width");
    }
    if (k + 1 < num_layers() && spec.output_width != layer(k + 1).input_width) {
      throw UsageError("layer " + std::to_string(k) + " outputs " +
                       std::to_string(spec.output_width) + " units but layer " +
                       std::to_string(k + 1) + " expects " +
                       std::to_string(layer(k + 1).input_width));
    }
  }
  if (decoder_layers.back().output_width != input_width()) {
    throw UsageError("decoder output width " +
                     std::to_string(decoder_layers.back().output_width) +
                     " does not match input width " +
                     std::to_string(input_width()));
  }
  if (code_layer_index + 1 != encoder_layers.size()) {
    throw UsageError("code layer must be the last encoder layer");
  }
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw UsageError("lambda must be a finite non-negative number");
  }
}

DsaeConfig DsaeConfig::from_widths(
    std::span<const std::size_t> encoder_widths,
    std::span<const Activation> encoder_activations,
    std::span<const std::size_t> decoder_widths,
    std::span<const Activation> decoder_activations, double lambda,
    std::uint64_t seed) {
  if (encoder_widths.size() < 2) {
    throw UsageError("encoder needs an input width and at least one layer width");
  }
  if (decoder_widths.empty()) {
    throw UsageError("decoder needs at least one layer width");
  }
  auto pick = [](std::span<const Activation> acts, std::size_t count,
                 std::size_t k, const char* half) {
    if (acts.size() == 1) return acts[0];
    if (acts.size() != count) {
      throw UsageError(std::string(half) + " has " + std::to_string(count) +
                       " layers but " + std::to_string(acts.size()) +
                       " activations");
    }
    return acts[k];
  };

  DsaeConfig config;
  const std::size_t n_enc = encoder_widths.size() - 1;
  for (std::size_t k = 0; k < n_enc; ++k) {
    config.encoder_layers.push_back(
        {encoder_widths[k], encoder_widths[k + 1],
         pick(encoder_activations, n_enc, k, "encoder")});
  }
  std::size_t in = encoder_widths.back();
  for (std::size_t k = 0; k < decoder_widths.size(); ++k) {
    config.decoder_layers.push_back(
        {in, decoder_widths[k],
         pick(decoder_activations, decoder_widths.size(), k, "decoder")});
    in = decoder_widths[k];
  }
  config.lambda = lambda;
  config.code_layer_index = n_enc - 1;
  config.seed = seed;
  config.validate();
  return config;
}

DsaeModel DsaeModel::initialize(const DsaeConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.seed, 0));
  std::vector<Layer> layers;
  layers.reserve(config.num_layers());
  for (std::size_t k = 0; k < config.num_layers(); ++k) {
    const LayerSpec& spec = config.layer(k);
    const double limit = std::sqrt(
        6.0 / static_cast<double>(spec.input_width + spec.output_width));
    Layer layer;
    layer.weights.resize(static_cast<Eigen::Index>(spec.output_width),
                         static_cast<Eigen::Index>(spec.input_width));
    for (Eigen::Index i = 0; i < layer.weights.size(); ++i) {
      layer.weights.data()[i] = rng.uniform(-limit, limit);
    }
    layer.bias = Vector::Zero(static_cast<Eigen::Index>(spec.output_width));
    layer.activation = spec.activation;
    layers.push_back(std::move(layer));
  }
  return DsaeModel(config, std::move(layers));
}

DsaeModel::DsaeModel(DsaeConfig config, std::vector<Layer> layers)
    : config_(std::move(config)), layers_(std::move(layers)) {
  config_.validate();
  if (layers_.size() != config_.num_layers()) {
    throw UsageError("model has " + std::to_string(layers_.size()) +
                     " layers but config describes " +
                     std::to_string(config_.num_layers()));
  }
  for (std::size_t k = 0; k < layers_.size(); ++k) {
    const LayerSpec& spec = config_.layer(k);
    const Layer& layer = layers_[k];
    if (static_cast<std::size_t>(layer.weights.rows()) != spec.output_width ||
        static_cast<std::size_t>(layer.weights.cols()) != spec.input_width ||
        static_cast<std::size_t>(layer.bias.size()) != spec.output_width) {
      throw UsageError("layer " + std::to_string(k) +
                       " parameter shapes do not match the config");
    }
    if (layer.activation != spec.activation) {
      throw UsageError("layer " + std::to_string(k) +
                       " activation does not match the config");
    }
  }
}

std::size_t DsaeModel::parameter_count() const {
  std::size_t n = 0;
  for (const Layer& layer : layers_) {
    n += static_cast<std::size_t>(layer.weights.size() + layer.bias.size());
  }
  return n;
}

bool DsaeModel::all_finite() const {
  return std::all_of(layers_.begin(), layers_.end(), [](const Layer& layer) {
    return layer.weights.allFinite() && layer.bias.allFinite();
  });
}

ForwardPass forward(const DsaeModel& model, const Matrix& batch) {
  check_columns(model, batch);
  ForwardPass pass;
  pass.code_layer_index = model.config().code_layer_index;
  pass.activations.reserve(model.layers().size() + 1);
  pass.activations.push_back(batch);
  for (std::size_t k = 0; k < model.layers().size(); ++k) {
    const Layer& layer = model.layers()[k];
    Matrix z = pass.activations.back() * layer.weights.transpose();
    z.rowwise() += layer.bias.transpose();
    apply_activation(layer.activation, z);
    if (!z.allFinite()) {
      throw NumericError("non-finite activation in layer " + std::to_string(k));
    }
    pass.activations.push_back(std::move(z));
  }
  return pass;
}

LossBreakdown loss_from_pass(const DsaeModel& model, const Matrix& batch,
                             const ForwardPass& pass) {
  const double rows = static_cast<double>(batch.rows());
  LossBreakdown loss;
  if (batch.rows() == 0) return loss;
  loss.mse = (pass.reconstruction() - batch).squaredNorm() /
             (rows * static_cast<double>(batch.cols()));
  loss.penalty = model.config().lambda == 0.0
                     ? 0.0
                     : model.config().lambda * pass.code().cwiseAbs().sum() / rows;
  loss.total = loss.mse + loss.penalty;
  return loss;
}

LossBreakdown loss_with_penalty(const DsaeModel& model, const Matrix& batch) {
  return loss_from_pass(model, batch, forward(model, batch));
}

Gradients backward(const DsaeModel& model, const Matrix& batch,
                   const ForwardPass& pass) {
  check_columns(model, batch);
  const std::size_t n_layers = model.layers().size();
  if (pass.activations.size() != n_layers + 1 ||
      pass.activations.front().rows() != batch.rows()) {
    throw UsageError("forward pass does not belong to this model and batch");
  }
  const double rows = static_cast<double>(batch.rows());
  const double lambda = model.config().lambda;
  const std::size_t code = model.config().code_layer_index;

  Gradients grads;
  grads.weights.resize(n_layers);
  grads.biases.resize(n_layers);

  // d(loss)/d(output of the current layer).
  Matrix upstream = (pass.reconstruction() - batch) *
                    (2.0 / (rows * static_cast<double>(batch.cols())));
  for (std::size_t k = n_layers; k-- > 0;) {
    const Layer& layer = model.layers()[k];
    const Matrix& out = pass.activations[k + 1];
    if (k == code && lambda != 0.0) {
      upstream.array() += (lambda / rows) * out.array().sign();
    }
    scale_by_derivative(layer.activation, out, upstream);
    grads.weights[k] = upstream.transpose() * pass.activations[k];
    grads.biases[k] = upstream.colwise().sum().transpose();
    if (k > 0) upstream = upstream * layer.weights;
  }
  return grads;
}

void TrainingConfig::validate() const {
  if (batch_size == 0) throw UsageError("batch_size must be positive");
  if (!(learning_rate > 0.0)) throw UsageError("learning_rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0)) throw UsageError("beta1 must lie in (0, 1)");
  if (!(beta2 > 0.0 && beta2 < 1.0)) throw UsageError("beta2 must lie in (0, 1)");
  if (!(epsilon > 0.0)) throw UsageError("epsilon must be positive");
}

AdamState AdamState::zeros_like(const DsaeModel& model) {
  AdamState state;
  for (const Layer& layer : model.layers()) {
    state.first_w.push_back(Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
    state.second_w.push_back(Matrix::Zero(layer.weights.rows(), layer.weights.cols()));
    state.first_b.push_back(Vector::Zero(layer.bias.size()));
    state.second_b.push_back(Vector::Zero(layer.bias.size()));
  }
  return state;
}

void adam_step(DsaeModel& model, const Gradients& gradients, AdamState& state,
               const TrainingConfig& config) {
  const std::size_t n_layers = model.layers().size();
  if (gradients.weights.size() != n_layers || gradients.biases.size() != n_layers ||
      state.first_w.size() != n_layers) {
    throw UsageError("gradient or optimizer state does not match the model");
  }
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(config.beta1, t);
  const double correction2 = 1.0 - std::pow(config.beta2, t);
  const double b1 = config.beta1;
  const double b2 = config.beta2;
  const double lr = config.learning_rate;
  const double eps = config.epsilon;

  auto update = [&](auto& param, const auto& grad, auto& m, auto& v) {
    m = b1 * m + (1.0 - b1) * grad;
    v = b2 * v + (1.0 - b2) * grad.cwiseProduct(grad);
    param.array() -= lr * (m.array() / correction1) /
                     ((v.array() / correction2).sqrt() + eps);
  };
  for (std::size_t k = 0; k < n_layers; ++k) {
    Layer& layer = model.layers()[k];
    update(layer.weights, gradients.weights[k], state.first_w[k], state.second_w[k]);
    update(layer.bias, gradients.biases[k], state.first_b[k], state.second_b[k]);
  }
}

TrainResult train(DsaeModel model, const Matrix& data,
                  const TrainingConfig& config) {
  config.validate();
  check_columns(model, data);
  if (data.rows() == 0) throw DataError("training matrix is empty");

  const std::size_t n = static_cast<std::size_t>(data.rows());
  std::size_t batch_size = config.batch_size;
  if (batch_size > n && config.epochs > 0) {
    log::warn("batch_size " + std::to_string(batch_size) +
              " exceeds the " + std::to_string(n) +
              " training rows; clamping");
    batch_size = n;
  }

  Rng rng(derive_seed(model.config().seed, 1));
  AdamState state = AdamState::zeros_like(model);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::vector<LossBreakdown> history;
  history.reserve(config.epochs);
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    rng.shuffle(std::span<std::size_t>(order));
    LossBreakdown epoch_loss;
    for (std::size_t start = 0; start < n; start += batch_size) {
      const std::size_t stop = std::min(n, start + batch_size);
      const Matrix batch = gather_rows(
          data, std::span<const std::size_t>(order).subspan(start, stop - start));
      const ForwardPass pass = forward(model, batch);
      const LossBreakdown loss = loss_from_pass(model, batch, pass);
      const double weight = static_cast<double>(stop - start) / static_cast<double>(n);
      epoch_loss.total += weight * loss.total;
      epoch_loss.mse += weight * loss.mse;
      epoch_loss.penalty += weight * loss.penalty;
      adam_step(model, backward(model, batch, pass), state, config);
    }
    if (!model.all_finite()) {
      throw NumericError("non-finite parameters after epoch " + std::to_string(epoch));
    }
    history.push_back(epoch_loss);
  }
  return TrainResult{std::move(model), std::move(history)};
}

Matrix reconstruction_errors(const DsaeModel& model, const Matrix& data) {
  const ForwardPass pass = forward(model, data);
  return (data - pass.reconstruction()).array().square().matrix();
}

}  // namespace dsaee::nn
