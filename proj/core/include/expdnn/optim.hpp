#pragma once

#include <cstdint>
#include <utility>

#include "expdnn/network.hpp"

namespace expdnn {

/// Nadam hyperparameters. Defaults are the common framework defaults; every
/// field can be overridden from the experiment config.
struct NadamHyper {
  double learning_rate = 0.002;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-7;
  double schedule_decay = 0.004;
};

void validate(const NadamHyper& hyper);

/// Moment accumulators mirroring the parameter shapes, plus the step counter
/// and the running product of momentum-schedule values.
struct NadamState {
  Gradients m;
  Gradients v;
  std::uint64_t t = 0;
  double mu_product = 1.0;
  NadamHyper hyper;

  static NadamState init(const ExpDnnParams& like, NadamHyper hyper = {});
};

/// mu_t = beta1 * (1 - 0.5 * 0.96^(t * schedule_decay)), t >= 1.
double momentum_schedule(std::uint64_t t, const NadamHyper& hyper);

/// One Nadam update. With t' = t+1 and mu_i = momentum_schedule(i):
///   m <- b1*m + (1-b1)*g            v <- b2*v + (1-b2)*g^2
///   g_hat = g / (1 - prod_{i<=t'} mu_i)
///   m_hat = m / (1 - prod_{i<=t'+1} mu_i)
///   m_bar = (1 - mu_t')*g_hat + mu_{t'+1}*m_hat
///   v_hat = v / (1 - b2^t')
///   theta <- theta - lr * m_bar / (sqrt(v_hat) + eps)
void nadam_step_inplace(NadamState& state, ExpDnnParams& params,
                        const Gradients& grads);

/// Pure variant of nadam_step_inplace.
std::pair<ExpDnnParams, NadamState> nadam_step(NadamState state,
                                               ExpDnnParams params,
                                               const Gradients& grads);

}  // namespace expdnn
