// src/optim.cc

// Copyright 2026  MTLM toolkit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "mtlm/optim.h"

#include <cmath>

#include "mtlm/errors.h"

namespace mtlm {

AdamState AdamState::init_like(const std::vector<Tensor>& params, double beta1,
                               double beta2, double epsilon) {
  MTLM_CHECK(beta1 > 0.0 && beta1 < 1.0 && beta2 > 0.0 && beta2 < 1.0,
             "AdamState: betas must lie in (0,1)");
  AdamState s;
  s.beta1 = beta1;
  s.beta2 = beta2;
  s.epsilon = epsilon;
  s.m.reserve(params.size());
  s.v.reserve(params.size());
  for (const Tensor& p : params) {
    s.m.push_back(Tensor::zeros(p.shape));
    s.v.push_back(Tensor::zeros(p.shape));
  }
  return s;
}

void adam_step(std::vector<Tensor*>& params, const Gradients& grads,
               AdamState& state, double lr, double weight_decay) {
  MTLM_CHECK(lr > 0.0, "adam_step: lr must be positive");
  MTLM_CHECK(params.size() == grads.size() && params.size() == state.m.size() &&
                 params.size() == state.v.size(),
             "adam_step: parameter/gradient/state count mismatch");
  const std::uint64_t t = state.step + 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = grads[i];
    MTLM_CHECK(p.same_shape(g) && p.same_shape(state.m[i]) && p.same_shape(state.v[i]),
               "adam_step: shape mismatch");
    for (std::size_t j = 0; j < p.numel(); ++j) {
      double& m = state.m[i].data[j];
      double& v = state.v[i].data[j];
      m = state.beta1 * m + (1.0 - state.beta1) * g.data[j];
      v = state.beta2 * v + (1.0 - state.beta2) * g.data[j] * g.data[j];
      const double m_hat = m / bc1;
      const double v_hat = v / bc2;
      double update = m_hat / (std::sqrt(v_hat) + state.epsilon);
      if (weight_decay > 0.0) update += weight_decay * p.data[j];
      p.data[j] -= lr * update;
    }
  }
  state.step = t;
}

double lr_at(const LrSchedule& schedule, std::uint64_t step) {
  MTLM_CHECK(schedule.warmup_steps >= 1, "LrSchedule: warmup_steps must be >= 1");
  MTLM_CHECK(schedule.min_lr > 0.0 && schedule.min_lr <= schedule.peak_lr,
             "LrSchedule: need 0 < min_lr <= peak_lr");
  if (step <= schedule.warmup_steps) {
    return schedule.peak_lr * static_cast<double>(step) /
           static_cast<double>(schedule.warmup_steps);
  }
  if (step >= schedule.total_steps || schedule.total_steps <= schedule.warmup_steps) {
    return schedule.min_lr;
  }
  const double frac = static_cast<double>(step - schedule.warmup_steps) /
                      static_cast<double>(schedule.total_steps - schedule.warmup_steps);
  return schedule.peak_lr + (schedule.min_lr - schedule.peak_lr) * frac;
}

}  // namespace mtlm
