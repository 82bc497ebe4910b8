#include "expdnn/optim.hpp"

#include <cmath>
#include <string>

#include "expdnn/errors.hpp"

namespace expdnn {

void validate(const NadamHyper& hyper) {
  if (!(hyper.learning_rate > 0.0))
    throw ConfigError("learning_rate must be positive");
  if (!(hyper.beta1 > 0.0 && hyper.beta1 < 1.0))
    throw ConfigError("beta1 must lie in (0, 1)");
  if (!(hyper.beta2 > 0.0 && hyper.beta2 < 1.0))
    throw ConfigError("beta2 must lie in (0, 1)");
  if (!(hyper.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
}

NadamState NadamState::init(const ExpDnnParams& like, NadamHyper hyper) {
  NadamState state;
  state.m = zeros_like(like);
  state.v = zeros_like(like);
  state.t = 0;
  state.mu_product = 1.0;
  state.hyper = hyper;
  return state;
}

double momentum_schedule(std::uint64_t t, const NadamHyper& hyper) {
  return hyper.beta1 *
         (1.0 - 0.5 * std::pow(0.96, static_cast<double>(t) *
                                         hyper.schedule_decay));
}

void nadam_step_inplace(NadamState& state, ExpDnnParams& params,
                        const Gradients& grads) {
  if (!same_shapes(params, grads) || !same_shapes(params, state.m))
    throw ShapeError("nadam_step: state, params and grads shapes disagree");

  const NadamHyper& h = state.hyper;
  const std::uint64_t t = state.t + 1;
  const double mu_t = momentum_schedule(t, h);
  const double mu_next = momentum_schedule(t + 1, h);
  const double mu_prod = state.mu_product * mu_t;
  const double mu_prod_next = mu_prod * mu_next;
  const double g_corr = 1.0 / (1.0 - mu_prod);
  const double m_corr = 1.0 / (1.0 - mu_prod_next);
  const double v_corr = 1.0 / (1.0 - std::pow(h.beta2, static_cast<double>(t)));

  struct TensorRefs {
    std::vector<double>* p;
    std::vector<double>* m;
    std::vector<double>* v;
    const std::vector<double>* g;
  };
  std::vector<TensorRefs> tensors;
  for_each_tensor(params, [&](const std::string&, std::vector<double>& tp) {
    tensors.push_back({&tp, nullptr, nullptr, nullptr});
  });
  std::size_t i = 0;
  for_each_tensor(state.m, [&](const std::string&, std::vector<double>& tm) {
    tensors[i++].m = &tm;
  });
  i = 0;
  for_each_tensor(state.v, [&](const std::string&, std::vector<double>& tv) {
    tensors[i++].v = &tv;
  });
  i = 0;
  for_each_tensor(grads, [&](const std::string&, const std::vector<double>& tg) {
    tensors[i++].g = &tg;
  });

  for (TensorRefs& tr : tensors) {
    for (std::size_t e = 0; e < tr.p->size(); ++e) {
      const double g = (*tr.g)[e];
      double& m = (*tr.m)[e];
      double& v = (*tr.v)[e];
      m = h.beta1 * m + (1.0 - h.beta1) * g;
      v = h.beta2 * v + (1.0 - h.beta2) * g * g;
      const double g_hat = g * g_corr;
      const double m_hat = m * m_corr;
      const double m_bar = (1.0 - mu_t) * g_hat + mu_next * m_hat;
      const double v_hat = v * v_corr;
      (*tr.p)[e] -= h.learning_rate * m_bar / (std::sqrt(v_hat) + h.epsilon);
    }
  }

  state.mu_product = mu_prod;
  state.t = t;
}

std::pair<ExpDnnParams, NadamState> nadam_step(NadamState state,
                                               ExpDnnParams params,
                                               const Gradients& grads) {
  nadam_step_inplace(state, params, grads);
  return {std::move(params), std::move(state)};
}

}  // namespace expdnn
