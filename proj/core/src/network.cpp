#include "expdnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "expdnn/errors.hpp"

namespace expdnn {

std::string to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::linear: return "linear";
    case ActivationKind::tanh: return "tanh";
    case ActivationKind::sigmoid: return "sigmoid";
    case ActivationKind::softmax: return "softmax";
  }
  return "?";
}

std::string to_string(LossKind kind) {
  switch (kind) {
    case LossKind::mse: return "mse";
    case LossKind::binary_cross_entropy: return "binary_cross_entropy";
    case LossKind::categorical_cross_entropy: return "categorical_cross_entropy";
  }
  return "?";
}

ActivationKind activation_from_string(const std::string& name) {
  if (name == "linear") return ActivationKind::linear;
  if (name == "tanh") return ActivationKind::tanh;
  if (name == "sigmoid") return ActivationKind::sigmoid;
  if (name == "softmax") return ActivationKind::softmax;
  throw ConfigError("unknown activation '" + name +
                    "' (expected linear, tanh, sigmoid or softmax)");
}

LossKind loss_from_string(const std::string& name) {
  if (name == "mse") return LossKind::mse;
  if (name == "binary_cross_entropy") return LossKind::binary_cross_entropy;
  if (name == "categorical_cross_entropy")
    return LossKind::categorical_cross_entropy;
  throw ConfigError("unknown loss '" + name +
                    "' (expected mse, binary_cross_entropy or "
                    "categorical_cross_entropy)");
}

void validate(const NetworkConfig& config) {
  if (config.n_inputs == 0) throw ConfigError("n_inputs must be positive");
  if (config.n_outputs == 0) throw ConfigError("n_outputs must be positive");
  if (config.hidden_sizes.size() < 2)
    throw ConfigError("at least two hidden layers are required, got " +
                      std::to_string(config.hidden_sizes.size()));
  if (config.hidden_sizes.size() != config.hidden_activations.size())
    throw ConfigError("hidden_sizes and hidden_activations lengths differ");
  for (std::size_t s : config.hidden_sizes)
    if (s == 0) throw ConfigError("hidden layer sizes must be positive");
  if (config.hidden_activations.front() != ActivationKind::linear)
    throw ConfigError("the first hidden layer must use a linear activation");
  for (ActivationKind a : config.hidden_activations)
    if (a == ActivationKind::softmax)
      throw ConfigError("softmax is only permitted on the output layer");
  const bool ok =
      (config.loss == LossKind::mse &&
       config.output_activation == ActivationKind::linear) ||
      (config.loss == LossKind::binary_cross_entropy &&
       config.output_activation == ActivationKind::sigmoid) ||
      (config.loss == LossKind::categorical_cross_entropy &&
       config.output_activation == ActivationKind::softmax);
  if (!ok)
    throw ConfigError("loss " + to_string(config.loss) +
                      " cannot pair with output activation " +
                      to_string(config.output_activation));
}

bool same_shapes(const ExpDnnParams& a, const ExpDnnParams& b) {
  if (a.explainable_weights.size() != b.explainable_weights.size()) return false;
  if (a.hidden_weights.size() != b.hidden_weights.size()) return false;
  if (a.hidden_biases.size() != b.hidden_biases.size()) return false;
  for (std::size_t k = 0; k < a.hidden_weights.size(); ++k) {
    if (!a.hidden_weights[k].same_shape(b.hidden_weights[k])) return false;
    if (a.hidden_biases[k].size() != b.hidden_biases[k].size()) return false;
  }
  return a.output_weights.same_shape(b.output_weights) &&
         a.output_bias.size() == b.output_bias.size();
}

std::size_t param_count(const ExpDnnParams& p) {
  std::size_t n = 0;
  for_each_tensor(p, [&](const std::string&, const std::vector<double>& t) {
    n += t.size();
  });
  return n;
}

ExpDnnParams zeros_like(const ExpDnnParams& p) {
  ExpDnnParams z = p;
  for_each_tensor(z, [](const std::string&, std::vector<double>& t) {
    std::fill(t.begin(), t.end(), 0.0);
  });
  return z;
}

ExpDnnParams init_params(const NetworkConfig& config, Rng& rng) {
  validate(config);
  const std::size_t l = config.hidden_sizes.size();
  ExpDnnParams p;
  p.explainable_weights.assign(config.n_inputs, 1.0);
  p.hidden_weights.reserve(l);
  p.hidden_biases.reserve(l);
  for (std::size_t k = 0; k < l; ++k) {
    const std::size_t fan_in = k == 0 ? config.n_inputs : config.hidden_sizes[k - 1];
    const std::size_t fan_out = config.hidden_sizes[k];
    if (k == 0) {
      p.hidden_weights.emplace_back(fan_out, fan_in, 1.0);
      p.hidden_biases.emplace_back(fan_out, 1.0);
    } else {
      Matrix w(fan_out, fan_in);
      const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
      for (double& e : w.data) e = rng.uniform(-limit, limit);
      p.hidden_weights.push_back(std::move(w));
      p.hidden_biases.emplace_back(fan_out, 0.0);
    }
  }
  const std::size_t fan_in = config.hidden_sizes.back();
  Matrix wo(config.n_outputs, fan_in);
  const double limit =
      std::sqrt(6.0 / static_cast<double>(fan_in + config.n_outputs));
  for (double& e : wo.data) e = rng.uniform(-limit, limit);
  p.output_weights = std::move(wo);
  p.output_bias.assign(config.n_outputs, 0.0);
  return p;
}

namespace {

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

void softmax_into(const Vector& z, Vector& out) {
  const double zmax = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  out.resize(z.size());
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - zmax);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
}

void apply_activation_into(ActivationKind kind, const Vector& z, Vector& out) {
  switch (kind) {
    case ActivationKind::linear:
      out = z;
      return;
    case ActivationKind::tanh:
      out.resize(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) out[i] = std::tanh(z[i]);
      return;
    case ActivationKind::sigmoid:
      out.resize(z.size());
      for (std::size_t i = 0; i < z.size(); ++i) out[i] = sigmoid(z[i]);
      return;
    case ActivationKind::softmax:
      softmax_into(z, out);
      return;
  }
}

// d(activation)/d(pre) written in terms of the activated value.
double activation_deriv_scalar(ActivationKind kind, double a) {
  switch (kind) {
    case ActivationKind::linear: return 1.0;
    case ActivationKind::tanh: return 1.0 - a * a;
    case ActivationKind::sigmoid: return a * (1.0 - a);
    case ActivationKind::softmax: break;
  }
  throw std::invalid_argument(
      "softmax has no elementwise derivative; its gradient is fused with "
      "categorical cross-entropy in backward()");
}

void check_params_shape(const ExpDnnParams& params, const NetworkConfig& config) {
  const std::size_t l = config.hidden_sizes.size();
  if (params.explainable_weights.size() != config.n_inputs ||
      params.hidden_weights.size() != l || params.hidden_biases.size() != l)
    throw ShapeError("params do not match config layer structure");
  for (std::size_t k = 0; k < l; ++k) {
    const std::size_t fan_in = k == 0 ? config.n_inputs : config.hidden_sizes[k - 1];
    if (params.hidden_weights[k].rows != config.hidden_sizes[k] ||
        params.hidden_weights[k].cols != fan_in ||
        params.hidden_biases[k].size() != config.hidden_sizes[k])
      throw ShapeError("hidden layer " + std::to_string(k) +
                       " parameters do not match config");
  }
  if (params.output_weights.rows != config.n_outputs ||
      params.output_weights.cols != config.hidden_sizes.back() ||
      params.output_bias.size() != config.n_outputs)
    throw ShapeError("output layer parameters do not match config");
}

constexpr double kCrossEntropyClamp = 1e-7;

double clamp_prob(double y) {
  return std::min(std::max(y, kCrossEntropyClamp), 1.0 - kCrossEntropyClamp);
}

}  // namespace

Vector apply_activation(ActivationKind kind, const Vector& z) {
  Vector out;
  apply_activation_into(kind, z, out);
  return out;
}

Vector activation_derivative(ActivationKind kind, const Vector& activated) {
  Vector out(activated.size());
  for (std::size_t i = 0; i < activated.size(); ++i)
    out[i] = activation_deriv_scalar(kind, activated[i]);
  return out;
}

void forward_into(const ExpDnnParams& params, const NetworkConfig& config,
                  const Vector& x, ForwardTrace& trace) {
  if (x.size() != config.n_inputs)
    throw ShapeError("input has length " + std::to_string(x.size()) +
                     " but the network expects " +
                     std::to_string(config.n_inputs));
  check_params_shape(params, config);

  const std::size_t l = config.hidden_sizes.size();
  trace.input = x;
  trace.explainable_out.resize(config.n_inputs);
  for (std::size_t i = 0; i < config.n_inputs; ++i)
    trace.explainable_out[i] = params.explainable_weights[i] * x[i];

  trace.hidden_pre.resize(l);
  trace.hidden_out.resize(l);
  const Vector* prev = &trace.explainable_out;
  for (std::size_t k = 0; k < l; ++k) {
    const Matrix& w = params.hidden_weights[k];
    Vector& pre = trace.hidden_pre[k];
    pre.resize(w.rows);
    for (std::size_t j = 0; j < w.rows; ++j) {
      double sum = params.hidden_biases[k][j];
      const double* row = w.data.data() + j * w.cols;
      for (std::size_t i = 0; i < w.cols; ++i) sum += row[i] * (*prev)[i];
      pre[j] = sum;
    }
    apply_activation_into(config.hidden_activations[k], pre, trace.hidden_out[k]);
    prev = &trace.hidden_out[k];
  }

  const Matrix& wo = params.output_weights;
  Vector& out = trace.output;
  Vector pre_out(wo.rows);
  for (std::size_t j = 0; j < wo.rows; ++j) {
    double sum = params.output_bias[j];
    const double* row = wo.data.data() + j * wo.cols;
    for (std::size_t i = 0; i < wo.cols; ++i) sum += row[i] * (*prev)[i];
    pre_out[j] = sum;
  }
  apply_activation_into(config.output_activation, pre_out, out);
}

ForwardTrace forward(const ExpDnnParams& params, const NetworkConfig& config,
                     const Vector& x) {
  ForwardTrace trace;
  forward_into(params, config, x, trace);
  return trace;
}

double compute_loss(LossKind kind, const Matrix& predictions,
                    const Matrix& targets) {
  if (!predictions.same_shape(targets))
    throw ShapeError("predictions are " + std::to_string(predictions.rows) +
                     "x" + std::to_string(predictions.cols) + " but targets are " +
                     std::to_string(targets.rows) + "x" +
                     std::to_string(targets.cols));
  for (double y : predictions.data)
    if (!std::isfinite(y))
      throw NumericError("non-finite prediction in loss computation");

  const double entries =
      static_cast<double>(predictions.rows) * static_cast<double>(predictions.cols);
  double total = 0.0;
  switch (kind) {
    case LossKind::mse:
      for (std::size_t i = 0; i < predictions.data.size(); ++i) {
        const double d = predictions.data[i] - targets.data[i];
        total += d * d;
      }
      return total / entries;
    case LossKind::binary_cross_entropy:
      for (std::size_t i = 0; i < predictions.data.size(); ++i) {
        const double y = clamp_prob(predictions.data[i]);
        const double t = targets.data[i];
        total -= t * std::log(y) + (1.0 - t) * std::log(1.0 - y);
      }
      return total / entries;
    case LossKind::categorical_cross_entropy:
      for (std::size_t i = 0; i < predictions.data.size(); ++i) {
        const double y = clamp_prob(predictions.data[i]);
        total -= targets.data[i] * std::log(y);
      }
      return total / static_cast<double>(predictions.rows);
  }
  return total;
}

void backward_into(const ExpDnnParams& params, const NetworkConfig& config,
                   std::span<const ForwardTrace> traces, const Matrix& targets,
                   Gradients& grads, BackwardWorkspace& ws) {
  check_params_shape(params, config);
  if (traces.size() != targets.rows || targets.cols != config.n_outputs)
    throw ShapeError("batch of " + std::to_string(traces.size()) +
                     " traces does not match targets " +
                     std::to_string(targets.rows) + "x" +
                     std::to_string(targets.cols));
  if (!same_shapes(grads, params)) grads = zeros_like(params);
  for_each_tensor(grads, [](const std::string&, std::vector<double>& t) {
    std::fill(t.begin(), t.end(), 0.0);
  });

  const std::size_t l = config.hidden_sizes.size();
  const std::size_t batch = traces.size();
  const double entries =
      static_cast<double>(batch) * static_cast<double>(config.n_outputs);
  double scale = 0.0;
  switch (config.loss) {
    case LossKind::mse: scale = 2.0 / entries; break;
    case LossKind::binary_cross_entropy: scale = 1.0 / entries; break;
    case LossKind::categorical_cross_entropy:
      scale = 1.0 / static_cast<double>(batch);
      break;
  }

  ws.delta.resize(l);
  for (std::size_t k = 0; k < l; ++k) ws.delta[k].resize(config.hidden_sizes[k]);
  ws.delta_out.resize(config.n_outputs);
  ws.err.resize(config.n_inputs);

  for (std::size_t s = 0; s < batch; ++s) {
    const ForwardTrace& tr = traces[s];
    if (tr.output.size() != config.n_outputs || tr.hidden_out.size() != l)
      throw ShapeError("trace " + std::to_string(s) + " does not match config");

    // Fused head delta; identical form for all three head/loss pairings up
    // to the mse factor of 2 already folded into scale.
    for (std::size_t j = 0; j < config.n_outputs; ++j)
      ws.delta_out[j] = (tr.output[j] - targets(s, j)) * scale;

    // Hidden deltas, top layer first.
    {
      const Matrix& wo = params.output_weights;
      const ActivationKind act = config.hidden_activations[l - 1];
      Vector& d = ws.delta[l - 1];
      for (std::size_t j = 0; j < d.size(); ++j) {
        double e = 0.0;
        for (std::size_t i = 0; i < wo.rows; ++i) e += wo(i, j) * ws.delta_out[i];
        d[j] = e * activation_deriv_scalar(act, tr.hidden_out[l - 1][j]);
      }
    }
    for (std::size_t k = l - 1; k-- > 0;) {
      const Matrix& w = params.hidden_weights[k + 1];
      const ActivationKind act = config.hidden_activations[k];
      Vector& d = ws.delta[k];
      for (std::size_t j = 0; j < d.size(); ++j) {
        double e = 0.0;
        for (std::size_t i = 0; i < w.rows; ++i) e += w(i, j) * ws.delta[k + 1][i];
        d[j] = e * activation_deriv_scalar(act, tr.hidden_out[k][j]);
      }
    }

    // Parameter gradients.
    {
      const Vector& a = tr.hidden_out[l - 1];
      for (std::size_t j = 0; j < config.n_outputs; ++j) {
        double* row = grads.output_weights.data.data() + j * a.size();
        for (std::size_t i = 0; i < a.size(); ++i)
          row[i] += ws.delta_out[j] * a[i];
        grads.output_bias[j] += ws.delta_out[j];
      }
    }
    for (std::size_t k = 0; k < l; ++k) {
      const Vector& prev = k == 0 ? tr.explainable_out : tr.hidden_out[k - 1];
      Matrix& gw = grads.hidden_weights[k];
      for (std::size_t j = 0; j < gw.rows; ++j) {
        const double dj = ws.delta[k][j];
        double* row = gw.data.data() + j * gw.cols;
        for (std::size_t i = 0; i < gw.cols; ++i) row[i] += dj * prev[i];
        grads.hidden_biases[k][j] += dj;
      }
    }

    // Error arriving at the explainable outputs v_i, then dL/dw_i = x_i * err_i.
    const Matrix& w0 = params.hidden_weights[0];
    for (std::size_t i = 0; i < config.n_inputs; ++i) {
      double e = 0.0;
      for (std::size_t j = 0; j < w0.rows; ++j) e += w0(j, i) * ws.delta[0][j];
      grads.explainable_weights[i] += e * tr.input[i];
    }
  }
}

Gradients backward(const ExpDnnParams& params, const NetworkConfig& config,
                   std::span<const ForwardTrace> traces, const Matrix& targets) {
  Gradients grads = zeros_like(params);
  BackwardWorkspace ws;
  backward_into(params, config, traces, targets, grads, ws);
  return grads;
}

}  // namespace expdnn
