// include/mtlm/checkpoint.h

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

#ifndef MTLM_CHECKPOINT_H_
#define MTLM_CHECKPOINT_H_

#include <cstdint>
#include <string>
#include <vector>

#include "mtlm/model.h"
#include "mtlm/optim.h"

namespace mtlm {

// Self-describing training snapshot: a JSON header (config, step, vocab
// fingerprint, tensor manifest) followed by raw little-endian doubles for
// every parameter and both Adam moment sets.  save(load(x)) is
// byte-identical to x.
struct Checkpoint {
  ModelConfig config;
  std::uint64_t step = 0;
  std::uint64_t vocab_fingerprint = 0;
  std::vector<std::string> names;   // named parameter order
  std::vector<Tensor> params;       // aligned with names
  AdamState adam;                   // m/v aligned with names; adam.step == step

  static Checkpoint capture(const Model& model, const AdamState& adam,
                            std::uint64_t vocab_fingerprint);
  // Rebuild a live model (parameters as autodiff leaves).
  Model restore_model() const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace mtlm

#endif  // MTLM_CHECKPOINT_H_
