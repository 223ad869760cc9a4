// include/mtlm/optim.h

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

#ifndef MTLM_OPTIM_H_
#define MTLM_OPTIM_H_

#include <cstdint>
#include <vector>

#include "mtlm/tensor.h"

namespace mtlm {

// Gradients for a parameter set, shape-matched and in the same fixed order
// as the parameters they belong to.
using Gradients = std::vector<Tensor>;

struct AdamState {
  std::uint64_t step = 0;  // number of updates applied so far
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  // Allocate zero moments matching the given parameter shapes.
  static AdamState init_like(const std::vector<Tensor>& params,
                             double beta1 = 0.9, double beta2 = 0.999,
                             double epsilon = 1e-8);
};

// One bias-corrected Adam update over a flat parameter list; increments
// state.step.  weight_decay > 0 applies a decoupled (AdamW-style) term.
// Throws ContractViolation on any shape mismatch or lr <= 0.
void adam_step(std::vector<Tensor*>& params, const Gradients& grads,
               AdamState& state, double lr, double weight_decay = 0.0);

// Warmup/decay schedule: linear ramp 0 -> peak_lr over warmup_steps, then
// linear decay to min_lr at total_steps, clamped at min_lr beyond.
struct LrSchedule {
  std::uint64_t warmup_steps = 5000;
  double peak_lr = 2e-4;
  double min_lr = 1e-6;
  std::uint64_t total_steps = 100000;
};

double lr_at(const LrSchedule& schedule, std::uint64_t step);

}  // namespace mtlm

#endif  // MTLM_OPTIM_H_
