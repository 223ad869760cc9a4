// include/mtlm/nn.h

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

#ifndef MTLM_NN_H_
#define MTLM_NN_H_

#include <functional>
#include <memory>
#include <vector>

#include "mtlm/masks.h"
#include "mtlm/tensor.h"

namespace mtlm {
namespace nn {

// One value in a reverse-mode computation graph.  Operations allocate a new
// Var holding the forward result and a closure that scatters the incoming
// gradient to the parents.  Creation ids give a valid topological order
// because every op is created after its inputs.
struct Var {
  Tensor value;
  Tensor grad;  // same shape as value, lazily zero-initialized
  bool requires_grad = false;
  std::vector<std::shared_ptr<Var>> parents;
  std::function<void()> backprop;  // empty for leaves
  long id = 0;

  void ensure_grad() {
    if (grad.numel() != value.numel()) grad = Tensor::zeros(value.shape);
  }
  void zero_grad() { grad.fill(0.0); }
  double scalar() const { return value.data.at(0); }
};

using VarPtr = std::shared_ptr<Var>;

// Leaves.
VarPtr constant(Tensor value);
VarPtr parameter(Tensor value);  // requires_grad = true

// Elementwise and linear algebra.
VarPtr add(const VarPtr& a, const VarPtr& b);                 // same shape
VarPtr add_row_bias(const VarPtr& x, const VarPtr& bias);     // [n,m] + [m]
VarPtr matmul(const VarPtr& a, const VarPtr& b, bool trans_a = false,
              bool trans_b = false);
VarPtr scale(const VarPtr& x, double c);
VarPtr gelu(const VarPtr& x);
VarPtr relu(const VarPtr& x);
VarPtr mul(const VarPtr& a, const VarPtr& b);                 // elementwise

// Row-wise layer normalization with learned gain and bias, epsilon inside
// the square root.
VarPtr layer_norm(const VarPtr& x, const VarPtr& gain, const VarPtr& bias,
                  double eps = 1e-5);

// Multi-head scaled-dot-product attention over full-width q/k/v ([n,d]
// each, d divisible by n_heads).  Scores for disallowed (query,key) pairs
// are never computed, so outputs at any row are bitwise independent of
// blocked keys.
VarPtr attention(const VarPtr& q, const VarPtr& k, const VarPtr& v,
                 const AttentionMask& mask, std::size_t n_heads);

// Gather rows of an embedding table; backward scatter-adds.
VarPtr embedding(const VarPtr& table, const std::vector<int>& ids);

VarPtr log_softmax_rows(const VarPtr& x);

// Negative log-likelihood gathered at read rows: sum over r in read_rows of
// -x[r][targets[r]].  Scalar output; zero for an empty read set.
VarPtr nll(const VarPtr& log_probs, const std::vector<int>& targets,
           const std::vector<std::size_t>& read_rows);

VarPtr sum_all(const VarPtr& x);  // scalar

// Inverted dropout with an explicit mask tensor of the same shape
// (entries 0 or 1/(1-rate)); used only when training with dropout > 0.
VarPtr dropout(const VarPtr& x, const Tensor& keep_mask);

// Reverse-mode sweep from a scalar loss.  Accumulates into .grad of every
// requires_grad Var reachable through parents.  Grads are NOT zeroed here;
// callers zero parameter grads between steps.  Throws ContractViolation if
// loss is not a scalar.
void backward(const VarPtr& loss);

}  // namespace nn
}  // namespace mtlm

#endif  // MTLM_NN_H_
