#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "dsaee/error.hpp"
#include "dsaee/log.hpp"
#include "dsaee/nn.hpp"
#include "dsaee/random.hpp"
#include "support/grad_check.hpp"

using namespace dsaee;
using nn::Activation;

namespace {

nn::DsaeConfig make_config(std::vector<std::size_t> enc, std::vector<Activation> enc_act,
                           std::vector<std::size_t> dec, std::vector<Activation> dec_act,
                           double lambda, std::uint64_t seed) {
  return nn::DsaeConfig::from_widths(enc, enc_act, dec, dec_act, lambda, seed);
}

nn::DsaeModel identity_model(std::size_t width, double lambda = 0.0) {
  const nn::DsaeConfig cfg = make_config({width, width}, {Activation::kLinear}, {width},
                                         {Activation::kLinear}, lambda, 0);
  std::vector<nn::Layer> layers(2);
  for (auto& l : layers) {
    l.weights = Matrix::Identity(width, width);
    l.bias = Vector::Zero(width);
    l.activation = Activation::kLinear;
  }
  return nn::DsaeModel(cfg, layers);
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  Rng rng(seed);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-1.0, 1.0);
  return m;
}

double apply(Activation a, double z) {
  switch (a) {
    case Activation::kTanh: return std::tanh(z);
    case Activation::kRelu: return z > 0.0 ? z : 0.0;
    case Activation::kSigmoid: return 1.0 / (1.0 + std::exp(-z));
    case Activation::kLinear: return z;
  }
  return z;
}

// Scalar re-evaluation of the layer formulas, one row at a time.
struct Straight {
  std::vector<std::vector<double>> code;
  std::vector<std::vector<double>> out;
};

Straight straight_line(const nn::DsaeModel& model, const Matrix& x) {
  Straight s;
  const std::size_t code_layer = model.config().code_layer_index;
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    std::vector<double> a(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) a[j] = x(r, j);
    for (std::size_t k = 0; k < model.layers().size(); ++k) {
      const nn::Layer& l = model.layers()[k];
      std::vector<double> next(l.weights.rows());
      for (Eigen::Index i = 0; i < l.weights.rows(); ++i) {
        double z = l.bias(i);
        for (Eigen::Index j = 0; j < l.weights.cols(); ++j) z += l.weights(i, j) * a[j];
        next[i] = apply(l.activation, z);
      }
      a = next;
      if (k == code_layer) s.code.push_back(a);
    }
    s.out.push_back(a);
  }
  return s;
}

nn::DsaeModel net_424(double lambda) {
  return nn::DsaeModel::initialize(make_config({4, 2}, {Activation::kTanh}, {4},
                                               {Activation::kSigmoid}, lambda, 17));
}

}  // namespace

TEST_CASE("activation names round-trip") {
  for (Activation a : {Activation::kTanh, Activation::kRelu, Activation::kSigmoid,
                       Activation::kLinear}) {
    CHECK(nn::parse_activation(nn::to_string(a)) == a);
  }
  CHECK(nn::parse_activation("ReLU") == Activation::kRelu);
  CHECK_THROWS_AS(nn::parse_activation("softmax"), UsageError);
}

TEST_CASE("config validation") {
  CHECK_NOTHROW(make_config({6, 3, 2}, {Activation::kTanh}, {3, 6}, {Activation::kTanh}, 0, 0)
                    .validate());
  CHECK_THROWS_AS(make_config({6, 3}, {Activation::kTanh}, {5}, {Activation::kTanh}, 0, 0),
                  UsageError);
  CHECK_THROWS_AS(make_config({6, 3}, {Activation::kTanh}, {6}, {Activation::kTanh}, -1.0, 0),
                  UsageError);
  CHECK_THROWS_AS(make_config({6, 3, 2}, {Activation::kTanh, Activation::kTanh, Activation::kRelu},
                              {3, 6}, {Activation::kTanh}, 0, 0),
                  UsageError);
  const auto cfg =
      make_config({6, 3, 2}, {Activation::kTanh, Activation::kRelu}, {3, 6}, {Activation::kLinear},
                  1e-5, 0);
  CHECK(cfg.num_layers() == 4);
  CHECK(cfg.code_layer_index == 1);
  CHECK(cfg.layer(1).activation == Activation::kRelu);
  CHECK(cfg.layer(3).output_width == 6);
}

TEST_CASE("glorot initialisation bounds and zero biases") {
  const auto model = nn::DsaeModel::initialize(
      make_config({30, 10}, {Activation::kTanh}, {30}, {Activation::kTanh}, 0, 3));
  const double bound = std::sqrt(6.0 / 40.0);
  for (const nn::Layer& l : model.layers()) {
    CHECK(l.weights.cwiseAbs().maxCoeff() <= bound);
    CHECK(l.weights.cwiseAbs().maxCoeff() > 0.8 * bound);
    CHECK(l.bias.isZero());
  }
  CHECK(model.parameter_count() == 30 * 10 + 10 + 10 * 30 + 30);
}

TEST_CASE("identity network reconstructs its input") {
  const auto model = identity_model(2);
  Matrix x(1, 2);
  x << 0.3, -0.7;
  const Matrix out = nn::forward(model, x).reconstruction();
  CHECK(out(0, 0) == 0.3);
  CHECK(out(0, 1) == -0.7);
  const auto loss = nn::loss_with_penalty(model, x);
  CHECK(loss.total == 0.0);
  CHECK(loss.mse == 0.0);
  CHECK(loss.penalty == 0.0);
  CHECK(nn::reconstruction_errors(model, random_matrix(5, 2, 1)).isZero());
}

TEST_CASE("zero weights give a zero code and a 0.5 reconstruction") {
  const auto cfg = make_config({3, 2}, {Activation::kTanh}, {3}, {Activation::kSigmoid}, 0, 0);
  std::vector<nn::Layer> layers = {{Matrix::Zero(2, 3), Vector::Zero(2), Activation::kTanh},
                                   {Matrix::Zero(3, 2), Vector::Zero(3), Activation::kSigmoid}};
  const nn::DsaeModel model(cfg, layers);
  const auto pass = nn::forward(model, random_matrix(4, 3, 2));
  CHECK(pass.code().isZero());
  CHECK((pass.reconstruction().array() == 0.5).all());
}

TEST_CASE("4-2-4 forward pass and loss match the straight-line oracle") {
  const auto model = net_424(1e-5);
  const Matrix x = random_matrix(5, 4, 99);
  const auto pass = nn::forward(model, x);
  const Straight s = straight_line(model, x);
  double mse = 0.0, l1 = 0.0;
  for (std::size_t r = 0; r < 5; ++r) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(pass.reconstruction()(r, j) == doctest::Approx(s.out[r][j]).epsilon(1e-14));
      mse += (s.out[r][j] - x(r, j)) * (s.out[r][j] - x(r, j));
    }
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(pass.code()(r, j) == doctest::Approx(s.code[r][j]).epsilon(1e-14));
      l1 += std::abs(s.code[r][j]);
    }
  }
  mse /= 20.0;
  const auto loss = nn::loss_with_penalty(model, x);
  CHECK(loss.mse == doctest::Approx(mse).epsilon(1e-13));
  CHECK(loss.penalty == doctest::Approx(1e-5 * l1 / 5.0).epsilon(1e-13));
  CHECK(loss.total == doctest::Approx(mse + 1e-5 * l1 / 5.0).epsilon(1e-13));

  const Matrix re = nn::reconstruction_errors(model, x);
  for (std::size_t r = 0; r < 5; ++r)
    for (std::size_t j = 0; j < 4; ++j)
      CHECK(re(r, j) == doctest::Approx((s.out[r][j] - x(r, j)) * (s.out[r][j] - x(r, j)))
                            .epsilon(1e-12));
}

TEST_CASE("lambda zero makes total equal mse") {
  const auto model = net_424(0.0);
  const auto loss = nn::loss_with_penalty(model, random_matrix(6, 4, 5));
  CHECK(loss.penalty == 0.0);
  CHECK(loss.total == loss.mse);
}

TEST_CASE("reconstruction error is the element-wise squared difference") {
  auto model = identity_model(2);
  model.layers()[1].bias(0) = -0.5;
  Matrix x(1, 2);
  x << 1.0, 2.0;
  const Matrix re = nn::reconstruction_errors(model, x);
  CHECK(re(0, 0) == 0.25);
  CHECK(re(0, 1) == 0.0);
}

TEST_CASE("forward errors") {
  const auto model = net_424(0.0);
  CHECK_THROWS_AS(nn::forward(model, random_matrix(2, 3, 1)), UsageError);

  auto big = identity_model(2);
  big.layers()[0].weights *= 1e300;
  Matrix x(1, 2);
  x << 1e10, 1.0;
  try {
    nn::forward(big, x);
    FAIL("expected a numeric error");
  } catch (const NumericError& e) {
    CHECK(std::string(e.what()).find("layer 0") != std::string::npos);
  }
  CHECK_THROWS_AS(nn::DsaeModel(make_config({2, 2}, {Activation::kLinear}, {2},
                                            {Activation::kLinear}, 0, 0),
                                {}),
                  UsageError);
}

TEST_CASE("zero residual gives zero gradients") {
  // Zero encoder weights make the reconstruction input-independent, so a
  // batch of that reconstruction reproduces itself exactly.
  auto model = nn::DsaeModel::initialize(
      make_config({3, 2}, {Activation::kTanh}, {3}, {Activation::kLinear}, 0.0, 4));
  model.layers()[0].weights.setZero();
  model.layers()[0].bias << 0.2, -0.4;
  const Matrix x = nn::forward(model, random_matrix(4, 3, 8)).reconstruction();
  const nn::Gradients g = nn::backward(model, x, nn::forward(model, x));
  for (const Matrix& w : g.weights) CHECK(w.isZero());
  for (const Vector& b : g.biases) CHECK(b.isZero());
}

TEST_CASE("backprop matches central differences on a 6-3-2-3-6 net") {
  for (double lambda : {0.0, 1e-5, 1e-2}) {
    const auto model = nn::DsaeModel::initialize(
        make_config({6, 3, 2}, {Activation::kTanh}, {3, 6}, {Activation::kSigmoid}, lambda, 21));
    const Matrix x = random_matrix(7, 6, 22);
    const auto r = testing::check_total_loss(model, x, 1e-5, 1e-6);
    CHECK(r.entries == model.parameter_count());
    CHECK(r.max_rel_error < 1e-5);
  }
}

TEST_CASE("penalty gradient alone matches central differences") {
  const double lambda = 0.05;
  const auto model = nn::DsaeModel::initialize(
      make_config({5, 3}, {Activation::kTanh}, {5}, {Activation::kLinear}, lambda, 31));
  const Matrix x = random_matrix(6, 5, 32);
  const auto pass = nn::forward(model, x);
  nn::DsaeModel plain = model;
  nn::DsaeConfig no_penalty = model.config();
  no_penalty.lambda = 0.0;
  plain = nn::DsaeModel(no_penalty, {model.layers().begin(), model.layers().end()});
  const nn::Gradients full = nn::backward(model, x, pass);
  const nn::Gradients mse_only = nn::backward(plain, x, pass);
  nn::Gradients penalty = full;
  for (std::size_t k = 0; k < full.weights.size(); ++k) {
    penalty.weights[k] -= mse_only.weights[k];
    penalty.biases[k] -= mse_only.biases[k];
  }
  // Decoder parameters do not touch the code layer.
  CHECK(penalty.weights[1].cwiseAbs().maxCoeff() < 1e-15);
  const auto r = testing::check_gradients(
      model, 1e-5, 1e-9,
      [&](const nn::DsaeModel& m) { return nn::loss_with_penalty(m, x).penalty; }, penalty);
  CHECK(r.max_rel_error < 1e-5);

  // Bias gradient of the penalty equals lambda / n * sum_r sign(h) (1 - h^2).
  const Matrix& h = pass.code();
  for (Eigen::Index i = 0; i < h.cols(); ++i) {
    double expected = 0.0;
    for (Eigen::Index r = 0; r < h.rows(); ++r) {
      const double s = h(r, i) > 0 ? 1.0 : (h(r, i) < 0 ? -1.0 : 0.0);
      expected += s * (1.0 - h(r, i) * h(r, i));
    }
    expected *= lambda / static_cast<double>(h.rows());
    CHECK(penalty.biases[0](i) == doctest::Approx(expected).epsilon(1e-12));
  }
}

namespace {

// One-parameter model (1-1 linear encoder, 1-1 linear decoder) used to drive
// Adam with chosen gradients.
nn::DsaeModel scalar_model() {
  const auto cfg = make_config({1, 1}, {Activation::kLinear}, {1}, {Activation::kLinear}, 0, 0);
  std::vector<nn::Layer> layers = {{Matrix::Zero(1, 1), Vector::Zero(1), Activation::kLinear},
                                   {Matrix::Zero(1, 1), Vector::Zero(1), Activation::kLinear}};
  return nn::DsaeModel(cfg, layers);
}

nn::Gradients scalar_gradient(double g) {
  nn::Gradients grads;
  grads.weights = {Matrix::Constant(1, 1, g), Matrix::Zero(1, 1)};
  grads.biases = {Vector::Zero(1), Vector::Zero(1)};
  return grads;
}

}  // namespace

TEST_CASE("first Adam step moves by the learning rate") {
  auto model = scalar_model();
  auto state = nn::AdamState::zeros_like(model);
  nn::TrainingConfig cfg;
  cfg.epsilon = 1e-8;
  nn::adam_step(model, scalar_gradient(1.0), state, cfg);
  CHECK(model.layers()[0].weights(0, 0) == doctest::Approx(-0.001).epsilon(1e-6));
  CHECK(state.step == 1);
}

TEST_CASE("zero gradient leaves parameters and advances the step") {
  auto model = nn::DsaeModel::initialize(
      make_config({3, 2}, {Activation::kTanh}, {3}, {Activation::kTanh}, 0, 1));
  const auto before = model;
  auto state = nn::AdamState::zeros_like(model);
  nn::Gradients zero;
  for (const nn::Layer& l : model.layers()) {
    zero.weights.push_back(Matrix::Zero(l.weights.rows(), l.weights.cols()));
    zero.biases.push_back(Vector::Zero(l.bias.size()));
  }
  nn::adam_step(model, zero, state, {});
  nn::adam_step(model, zero, state, {});
  CHECK(state.step == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(model.layers()[k].weights == before.layers()[k].weights);
    CHECK(model.layers()[k].bias == before.layers()[k].bias);
  }
}

TEST_CASE("two Adam steps follow the unrolled recurrence") {
  auto model = scalar_model();
  auto state = nn::AdamState::zeros_like(model);
  const nn::TrainingConfig cfg;  // lr 1e-3, betas 0.9 / 0.999, eps 1e-7
  nn::adam_step(model, scalar_gradient(1.0), state, cfg);
  CHECK(model.layers()[0].weights(0, 0) == doctest::Approx(-0.00099999990000001).epsilon(1e-12));
  nn::adam_step(model, scalar_gradient(2.0), state, cfg);
  CHECK(model.layers()[0].weights(0, 0) == doctest::Approx(-0.0019651818647874694).epsilon(1e-12));
}

TEST_CASE("training with zero epochs returns the model unchanged") {
  const auto model = net_424(1e-5);
  nn::TrainingConfig cfg;
  cfg.epochs = 0;
  const auto result = nn::train(model, random_matrix(10, 4, 3), cfg);
  CHECK(result.history.empty());
  for (std::size_t k = 0; k < 2; ++k)
    CHECK(result.model.layers()[k].weights == model.layers()[k].weights);
}

TEST_CASE("training is deterministic") {
  const auto model = net_424(1e-5);
  const Matrix x = random_matrix(37, 4, 4);
  nn::TrainingConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 8;
  const auto a = nn::train(model, x, cfg);
  const auto b = nn::train(model, x, cfg);
  REQUIRE(a.history.size() == 5);
  for (std::size_t e = 0; e < 5; ++e) CHECK(a.history[e].total == b.history[e].total);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(a.model.layers()[k].weights == b.model.layers()[k].weights);
    CHECK(a.model.layers()[k].bias == b.model.layers()[k].bias);
  }
}

TEST_CASE("constant data is learned") {
  Matrix x(50, 2);
  x.col(0).setConstant(0.3);
  x.col(1).setConstant(-0.6);
  const auto model = nn::DsaeModel::initialize(
      make_config({2, 3, 2}, {Activation::kTanh}, {3, 2}, {Activation::kLinear}, 1e-5, 8));
  nn::TrainingConfig cfg;
  cfg.epochs = 200;
  cfg.batch_size = 10;
  const auto result = nn::train(model, x, cfg);
  CHECK(result.history.back().mse < 1e-3);
  CHECK(result.history.back().mse < result.history.front().mse);
}

TEST_CASE("training input errors and batch clamping") {
  const auto model = net_424(0.0);
  CHECK_THROWS_AS(nn::train(model, Matrix(0, 4), {}), DataError);
  nn::TrainingConfig bad;
  bad.batch_size = 0;
  CHECK_THROWS_AS(nn::train(model, random_matrix(3, 4, 1), bad), UsageError);

  std::vector<std::string> warnings;
  log::set_sink([&](std::string_view m) { warnings.emplace_back(m); });
  nn::TrainingConfig cfg;
  cfg.epochs = 2;
  cfg.batch_size = 1000;
  const auto result = nn::train(model, random_matrix(12, 4, 1), cfg);
  log::set_sink({});
  CHECK(result.history.size() == 2);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("batch_size") != std::string::npos);
}

TEST_CASE("training on inputs that overflow raises a numeric error") {
  auto model = identity_model(2);
  model.layers()[0].weights *= 1e200;
  Matrix x(4, 2);
  x.setConstant(1e200);
  nn::TrainingConfig cfg;
  cfg.epochs = 1;
  cfg.batch_size = 4;
  CHECK_THROWS_AS(nn::train(model, x, cfg), NumericError);
}
