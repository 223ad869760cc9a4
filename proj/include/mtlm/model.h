// include/mtlm/model.h

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

#ifndef MTLM_MODEL_H_
#define MTLM_MODEL_H_

#include <string>
#include <utility>
#include <vector>

#include "mtlm/masks.h"
#include "mtlm/nn.h"
#include "mtlm/rng.h"
#include "mtlm/tensor.h"

namespace mtlm {

struct ModelConfig {
  std::size_t n_layers = 2;
  std::size_t n_heads = 2;
  std::size_t d_model = 64;
  std::size_t d_ff = 256;
  std::size_t vocab_size = 0;
  std::size_t max_len = 64;
  double dropout = 0.0;
  bool pre_norm = true;           // false selects post-norm block wiring
  bool learned_positions = true;  // false selects fixed sinusoidal positions
  bool mask_inputs = true;        // masked positions fed the <mask> embedding
  std::string activation = "gelu";  // or "relu"

  void validate() const;

  // The full-size configuration: 6 blocks, 12 heads, 768 hidden units,
  // 3072 feed-forward units, 7002 subword vocabulary.
  static ModelConfig paper_scale();
};

// Transformer encoder weights held as autodiff leaves.  The named order is
// fixed and shared by the optimizer state and the checkpoint layout.
struct ModelParams {
  struct Block {
    nn::VarPtr ln1_gain, ln1_bias;
    nn::VarPtr wq, bq, wk, bk, wv, bv, wo, bo;
    nn::VarPtr ln2_gain, ln2_bias;
    nn::VarPtr w1, b1, w2, b2;
  };

  nn::VarPtr tok_emb;  // [V, d]
  nn::VarPtr pos_emb;  // [max_len, d]
  std::vector<Block> blocks;
  nn::VarPtr out_w;  // [d, V]
  nn::VarPtr out_b;  // [V]

  std::vector<std::pair<std::string, nn::VarPtr>> named() const;
  std::vector<Tensor*> values() const;
  std::vector<Tensor> snapshot_values() const;
  std::vector<Tensor> snapshot_grads() const;
  void zero_grads() const;
  std::size_t parameter_count() const;
};

struct Model {
  ModelConfig config;
  ModelParams params;
};

// Fresh weights: normals with std 0.02 for matrices and embeddings, ones
// for layer-norm gains, zeros for biases.  Deterministic per rng seed.
Model init_model(const ModelConfig& config, Rng& rng);

// Full graph forward: per-row log-probabilities [n, V]; row i carries the
// prediction for the token at position i+1.  dropout_rng enables dropout
// (training only); inference calls leave it null.
nn::VarPtr forward(const Model& model, const std::vector<int>& ids,
                   const AttentionMask& mask, Rng* dropout_rng = nullptr);

// Grad-free inference over a batch of sequences evaluated through one set
// of stacked weight applications.  Shorter sequences are padded with <pad>
// up to the batch maximum; pad keys are blocked and pad rows are dropped
// from the returned per-sequence log-prob matrices.
std::vector<Tensor> forward_batch(const Model& model,
                                  const std::vector<std::vector<int>>& ids,
                                  const std::vector<AttentionMask>& masks);

}  // namespace mtlm

#endif  // MTLM_MODEL_H_
