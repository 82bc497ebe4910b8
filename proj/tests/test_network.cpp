#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "expdnn/errors.hpp"
#include "expdnn/network.hpp"
#include "support/reference.hpp"

using namespace expdnn;

namespace {

NetworkConfig table2_config() {
  NetworkConfig net;
  net.n_inputs = 2;
  net.hidden_sizes = {2, 2, 2};
  net.hidden_activations = {ActivationKind::linear, ActivationKind::tanh,
                            ActivationKind::tanh};
  net.n_outputs = 1;
  net.output_activation = ActivationKind::linear;
  net.loss = LossKind::mse;
  return net;
}

NetworkConfig random_config(Rng& rng, LossKind loss) {
  NetworkConfig net;
  net.n_inputs = 1 + rng.next_u64() % 8;
  const std::size_t layers = 2 + rng.next_u64() % 3;
  for (std::size_t k = 0; k < layers; ++k) {
    net.hidden_sizes.push_back(1 + rng.next_u64() % 8);
    net.hidden_activations.push_back(k == 0 ? ActivationKind::linear
                                            : ActivationKind::tanh);
  }
  net.loss = loss;
  switch (loss) {
    case LossKind::mse:
      net.n_outputs = 1 + rng.next_u64() % 3;
      net.output_activation = ActivationKind::linear;
      break;
    case LossKind::binary_cross_entropy:
      net.n_outputs = 1 + rng.next_u64() % 2;
      net.output_activation = ActivationKind::sigmoid;
      break;
    case LossKind::categorical_cross_entropy:
      net.n_outputs = 2 + rng.next_u64() % 3;
      net.output_activation = ActivationKind::softmax;
      break;
  }
  return net;
}

}  // namespace

TEST_CASE("config validation rejects illegal structures") {
  NetworkConfig net = table2_config();
  CHECK_NOTHROW(validate(net));

  NetworkConfig bad = net;
  bad.hidden_sizes = {2};
  bad.hidden_activations = {ActivationKind::linear};
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = net;
  bad.hidden_activations[0] = ActivationKind::tanh;
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = net;
  bad.hidden_activations[1] = ActivationKind::softmax;
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = net;
  bad.loss = LossKind::binary_cross_entropy;  // linear head stays
  CHECK_THROWS_AS(validate(bad), ConfigError);

  bad = net;
  bad.output_activation = ActivationKind::softmax;  // mse loss stays
  CHECK_THROWS_AS(validate(bad), ConfigError);
}

TEST_CASE("init_params honors the paper's all-ones start") {
  const NetworkConfig net = table2_config();
  Rng rng(5);
  const ExpDnnParams p = init_params(net, rng);

  for (double w : p.explainable_weights) CHECK(w == 1.0);
  for (double w : p.hidden_weights[0].data) CHECK(w == 1.0);
  for (double b : p.hidden_biases[0]) CHECK(b == 1.0);
  for (double b : p.hidden_biases[1]) CHECK(b == 0.0);
  for (double b : p.hidden_biases[2]) CHECK(b == 0.0);
  for (double b : p.output_bias) CHECK(b == 0.0);

  const double bound = std::sqrt(6.0 / 4.0);  // fan_in = fan_out = 2
  for (std::size_t k : {1u, 2u})
    for (double w : p.hidden_weights[k].data) {
      CHECK(w >= -bound);
      CHECK(w < bound);
    }
}

TEST_CASE("init is deterministic per seed and varies across seeds") {
  const NetworkConfig net = table2_config();
  Rng a(3), b(3), c(4);
  const ExpDnnParams pa = init_params(net, a);
  const ExpDnnParams pb = init_params(net, b);
  const ExpDnnParams pc = init_params(net, c);
  CHECK(pa.hidden_weights[1].data == pb.hidden_weights[1].data);
  CHECK(pa.hidden_weights[1].data != pc.hidden_weights[1].data);
}

TEST_CASE("activations: analytic values") {
  CHECK(apply_activation(ActivationKind::tanh, {0.0})[0] == 0.0);
  CHECK(apply_activation(ActivationKind::sigmoid, {0.0})[0] == 0.5);
  const Vector soft = apply_activation(ActivationKind::softmax, {7.5, 7.5, 7.5});
  for (double v : soft) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  const Vector lin = apply_activation(ActivationKind::linear, {7.0, -3.0});
  CHECK(lin == Vector{7.0, -3.0});
}

TEST_CASE("activation derivatives in terms of activated values") {
  CHECK(activation_derivative(ActivationKind::tanh, {0.0}) == Vector{1.0});
  CHECK(activation_derivative(ActivationKind::sigmoid, {0.5}) == Vector{0.25});
  CHECK(activation_derivative(ActivationKind::linear, {7.0, -3.0}) ==
        Vector{1.0, 1.0});
  CHECK_THROWS_AS(activation_derivative(ActivationKind::softmax, {0.5}),
                  std::invalid_argument);
}

TEST_CASE("softmax normalizes and stays in (0,1) for bounded logits") {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.next_u64() % 6;
    Vector z(n);
    for (double& v : z) v = rng.uniform(-50.0, 50.0);
    const Vector y = apply_activation(ActivationKind::softmax, z);
    double sum = 0.0;
    for (double v : y) {
      CHECK(v > 0.0);
      // Mathematically v < 1, but a logit gap beyond ~37 rounds the winner
      // to 1.0 in doubles.
      CHECK(v <= 1.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("forward: explainable layer and trivial heads") {
  const NetworkConfig net = table2_config();
  Rng rng(2);
  ExpDnnParams p = init_params(net, rng);

  const ForwardTrace trace = forward(p, net, {0.1, 0.1});
  CHECK(trace.explainable_out == Vector{0.1, 0.1});
  CHECK(trace.explainable_out[0] == p.explainable_weights[0] * 0.1);

  // Zero output layer annihilates everything.
  p.output_weights = Matrix(1, 2);
  p.output_bias = {0.0};
  CHECK(forward(p, net, {0.63, -0.2}).output == Vector{0.0});

  CHECK_THROWS_AS(forward(p, net, {1.0, 2.0, 3.0}), ShapeError);
}

TEST_CASE("forward: first hidden layer sums at paper initialization") {
  const NetworkConfig net = table2_config();
  Rng rng(2);
  ExpDnnParams p = init_params(net, rng);
  // Deep layers replaced by identity weights and zero biases.
  for (std::size_t k : {1u, 2u}) {
    p.hidden_weights[k] = Matrix(2, 2);
    p.hidden_weights[k](0, 0) = p.hidden_weights[k](1, 1) = 1.0;
  }
  const ForwardTrace trace = forward(p, net, {0.1, 0.1});
  CHECK(trace.hidden_out[0][0] == doctest::Approx(1.2).epsilon(1e-14));
  CHECK(trace.hidden_out[0][1] == doctest::Approx(1.2).epsilon(1e-14));
  CHECK(trace.hidden_pre[0] == trace.hidden_out[0]);  // linear layer
}

TEST_CASE("first hidden layer is linear: doubling v doubles pre minus bias") {
  const NetworkConfig net = table2_config();
  Rng rng(8);
  ExpDnnParams p = init_params(net, rng);

  // Dyadic inputs make the doubling exact bitwise.
  const Vector x{0.25, 0.5};
  const ForwardTrace base = forward(p, net, x);
  ExpDnnParams doubled = p;
  for (double& w : doubled.explainable_weights) w *= 2.0;
  const ForwardTrace twice = forward(doubled, net, x);
  for (std::size_t j = 0; j < 2; ++j) {
    const double b = p.hidden_biases[0][j];
    CHECK(twice.hidden_pre[0][j] - b == 2.0 * (base.hidden_pre[0][j] - b));
  }

  // Paper-table data: same property within rounding.
  const Vector xp{0.1, 0.3};
  const ForwardTrace bp = forward(p, net, xp);
  const ForwardTrace tp = forward(doubled, net, xp);
  for (std::size_t j = 0; j < 2; ++j) {
    const double b = p.hidden_biases[0][j];
    CHECK(tp.hidden_pre[0][j] - b ==
          doctest::Approx(2.0 * (bp.hidden_pre[0][j] - b)).epsilon(1e-14));
  }
}

TEST_CASE("losses: analytic values and error paths") {
  Matrix y(1, 1), t(1, 1);
  y(0, 0) = 0.5;
  t(0, 0) = 1.0;
  CHECK(compute_loss(LossKind::binary_cross_entropy, y, t) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  Matrix y3(1, 3), t3(1, 3);
  y3(0, 0) = y3(0, 1) = y3(0, 2) = 1.0 / 3.0;
  t3(0, 1) = 1.0;
  CHECK(compute_loss(LossKind::categorical_cross_entropy, y3, t3) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-12));

  Matrix same(2, 2);
  same(0, 0) = 1.5; same(1, 1) = -2.0;
  CHECK(compute_loss(LossKind::mse, same, same) == 0.0);

  Matrix wrong(2, 1);
  CHECK_THROWS_AS(compute_loss(LossKind::mse, same, wrong), ShapeError);

  Matrix bad = same;
  bad(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(compute_loss(LossKind::mse, bad, same), NumericError);
}

TEST_CASE("backward: zero loss gives zero gradients, zero column freezes") {
  const NetworkConfig net = table2_config();
  Rng rng(13);
  const ExpDnnParams p = init_params(net, rng);

  Matrix features(3, 2);
  features(0, 0) = 0.2; features(1, 0) = 0.5; features(2, 0) = 0.9;
  // column 1 identically zero
  std::vector<ForwardTrace> traces(3);
  Matrix targets(3, 1);
  for (std::size_t s = 0; s < 3; ++s) {
    traces[s] = forward(p, net, features.row(s));
    targets(s, 0) = traces[s].output[0];  // perfect fit
  }
  const Gradients zero = backward(p, net, traces, targets);
  for_each_tensor(zero, [](const std::string&, const std::vector<double>& t) {
    for (double g : t) CHECK(g == 0.0);
  });

  targets(0, 0) += 0.7;  // now a real error, but column 1 is still zero
  const Gradients g = backward(p, net, traces, targets);
  CHECK(g.explainable_weights[1] == 0.0);
  CHECK(g.explainable_weights[0] != 0.0);
}

TEST_CASE("forward matches the scalar-loop reference on random configs") {
  Rng rng(31);
  const LossKind losses[3] = {LossKind::mse, LossKind::binary_cross_entropy,
                              LossKind::categorical_cross_entropy};
  for (int trial = 0; trial < 30; ++trial) {
    const NetworkConfig net = random_config(rng, losses[trial % 3]);
    ExpDnnParams p = init_params(net, rng);
    for_each_tensor(p, [&](const std::string&, std::vector<double>& t) {
      for (double& v : t) v = rng.uniform(-0.9, 0.9);
    });
    Vector x(net.n_inputs);
    for (double& v : x) v = rng.uniform(-1.0, 1.0);
    const ForwardTrace trace = forward(p, net, x);
    const std::vector<double> ref = testing::scalar_forward<double>(p, net, x);
    for (std::size_t j = 0; j < net.n_outputs; ++j)
      CHECK(std::abs(trace.output[j] - ref[j]) < 1e-12);
  }
}

TEST_CASE("backward matches finite differences for every head/loss pairing") {
  Rng rng(47);
  for (LossKind loss : {LossKind::mse, LossKind::binary_cross_entropy,
                        LossKind::categorical_cross_entropy}) {
    double worst = 0.0;
    for (int point = 0; point < 10; ++point) {
      NetworkConfig net;
      net.n_inputs = 3;
      net.hidden_sizes = {3, 2, 2};
      net.hidden_activations = {ActivationKind::linear, ActivationKind::tanh,
                                ActivationKind::tanh};
      net.loss = loss;
      switch (loss) {
        case LossKind::mse:
          net.n_outputs = 2;
          net.output_activation = ActivationKind::linear;
          break;
        case LossKind::binary_cross_entropy:
          net.n_outputs = 1;
          net.output_activation = ActivationKind::sigmoid;
          break;
        case LossKind::categorical_cross_entropy:
          net.n_outputs = 3;
          net.output_activation = ActivationKind::softmax;
          break;
      }
      const ExpDnnParams p =
          testing::perturbed_init(net, NadamHyper{}, rng.next_u64());
      Rng drng(rng.next_u64());
      const Dataset data = testing::synthetic_dataset(net, drng, 6);
      const Gradients analytic = testing::analytic_gradients(p, net, data);
      const Gradients fd = testing::reference_fd_gradients(p, net, data, 1e-6);
      const GradCheckReport report = compare_gradients(analytic, fd, 1e-5);
      worst = std::max(worst, report.max_rel_error);
      CHECK(report.pass);
    }
    CHECK(worst <= 1e-5);
  }
}
