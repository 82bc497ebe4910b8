#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "expdnn/numerics.hpp"

namespace expdnn {

enum class ActivationKind { linear, tanh, sigmoid, softmax };
enum class LossKind { mse, binary_cross_entropy, categorical_cross_entropy };

std::string to_string(ActivationKind kind);
std::string to_string(LossKind kind);
ActivationKind activation_from_string(const std::string& name);
LossKind loss_from_string(const std::string& name);

/// Layer sizes and head of one ExpDNN. The input side always consists of
/// n_inputs single-weight explainable layers followed by a parameter-free
/// merge, so only the hidden stack and the output head vary.
struct NetworkConfig {
  std::size_t n_inputs = 0;
  std::vector<std::size_t> hidden_sizes;
  std::vector<ActivationKind> hidden_activations;
  std::size_t n_outputs = 0;
  ActivationKind output_activation = ActivationKind::linear;
  LossKind loss = LossKind::mse;
};

/// Throws ConfigError unless: sizes positive, at least two hidden layers,
/// first hidden activation linear, no softmax inside the stack, and the
/// head/loss pairing is one of linear+mse, sigmoid+bce, softmax+cce.
void validate(const NetworkConfig& config);

/// All trainable parameters. The explainable layer is one weight per input
/// and has no bias anywhere. hidden_weights[k] is hidden_sizes[k] x
/// (k == 0 ? n_inputs : hidden_sizes[k-1]).
struct ExpDnnParams {
  Vector explainable_weights;
  std::vector<Matrix> hidden_weights;
  std::vector<Vector> hidden_biases;
  Matrix output_weights;
  Vector output_bias;
};

/// Same shapes as ExpDnnParams; entries are dLoss/dParameter.
using Gradients = ExpDnnParams;

bool same_shapes(const ExpDnnParams& a, const ExpDnnParams& b);
std::size_t param_count(const ExpDnnParams& p);
ExpDnnParams zeros_like(const ExpDnnParams& p);

/// Visit every tensor of a parameter struct as (name, vector-of-doubles&).
/// Order is fixed: explainable, then each hidden layer's weights and biases,
/// then output weights and bias. The optimizer and finite-difference code
/// rely on this order being stable.
template <typename Params, typename Fn>
void for_each_tensor(Params&& p, Fn&& fn) {
  fn("explainable_weights", p.explainable_weights);
  for (std::size_t k = 0; k < p.hidden_weights.size(); ++k) {
    fn("hidden_weights[" + std::to_string(k) + "]", p.hidden_weights[k].data);
    fn("hidden_biases[" + std::to_string(k) + "]", p.hidden_biases[k]);
  }
  fn("output_weights", p.output_weights.data);
  fn("output_bias", p.output_bias);
}

/// Explainable weights, first-hidden weights and biases start at exactly 1;
/// deeper weights are Glorot-uniform in +-sqrt(6/(fan_in+fan_out)) drawn from
/// rng; deeper biases start at 0.
ExpDnnParams init_params(const NetworkConfig& config, Rng& rng);

/// linear -> z, tanh/sigmoid -> elementwise, softmax -> exp(z-max)/sum.
Vector apply_activation(ActivationKind kind, const Vector& z);

/// Derivative expressed through the activated values a: linear -> 1,
/// tanh -> 1-a^2, sigmoid -> a(1-a). softmax throws; its gradient only
/// exists fused with categorical cross-entropy in backward().
Vector activation_derivative(ActivationKind kind, const Vector& activated);

/// Everything forward() computes for one sample, kept for backprop.
struct ForwardTrace {
  Vector input;
  Vector explainable_out;
  std::vector<Vector> hidden_pre;
  std::vector<Vector> hidden_out;
  Vector output;
};

ForwardTrace forward(const ExpDnnParams& params, const NetworkConfig& config,
                     const Vector& x);

/// In-place variant reusing trace storage; the training loop calls this once
/// per sample per epoch, so it must not allocate after the first epoch.
void forward_into(const ExpDnnParams& params, const NetworkConfig& config,
                  const Vector& x, ForwardTrace& trace);

/// mse: mean over all entries of (y-t)^2. bce: mean over all entries of
/// -[t ln y + (1-t) ln(1-y)]. cce: mean over rows of -sum_j t_j ln y_j.
/// Cross-entropy predictions are clamped to [1e-7, 1-1e-7] before the log.
double compute_loss(LossKind kind, const Matrix& predictions,
                    const Matrix& targets);

/// Exact gradients of the mean loss over the batch. The output delta is the
/// fused form: (y-t)*scale for sigmoid+bce and softmax+cce, 2(y-t)*scale for
/// linear+mse, with scale matching the compute_loss averaging.
Gradients backward(const ExpDnnParams& params, const NetworkConfig& config,
                   std::span<const ForwardTrace> traces, const Matrix& targets);

/// Scratch space so the batched backward can run allocation-free.
struct BackwardWorkspace {
  std::vector<Vector> delta;  // one per hidden layer
  Vector delta_out;
  Vector err;
};

void backward_into(const ExpDnnParams& params, const NetworkConfig& config,
                   std::span<const ForwardTrace> traces, const Matrix& targets,
                   Gradients& grads, BackwardWorkspace& ws);

}  // namespace expdnn
