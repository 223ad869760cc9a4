// include/mtlm/tensor.h

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

#ifndef MTLM_TENSOR_H_
#define MTLM_TENSOR_H_

#include <cstddef>
#include <vector>

namespace mtlm {

// Dense double-precision tensor, row-major.  All model math in the toolkit
// is done in double; there are no float code paths.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;
  Tensor(std::vector<std::size_t> s, double fill = 0.0);

  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }
  static Tensor scalar(double v) { return Tensor({1}, v); }
  static Tensor matrix(std::size_t r, std::size_t c, double fill = 0.0) {
    return Tensor({r, c}, fill);
  }

  std::size_t numel() const { return data.size(); }
  std::size_t ndim() const { return shape.size(); }
  std::size_t rows() const { return shape.at(0); }
  std::size_t cols() const { return shape.at(1); }

  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  bool all_finite() const;
  void fill(double v);
};

// C = op(A) * op(B) where op is optional transposition.  Shapes are
// checked; the result is freshly allocated.
Tensor gemm(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b);

// C += op(A) * op(B), accumulating into an existing matrix.
void gemm_accum(Tensor& c, const Tensor& a, bool trans_a, const Tensor& b,
                bool trans_b);

// Row-wise softmax with max-subtraction; rows sum to 1 within 1e-9.
// Throws DataError on non-finite input.
Tensor softmax_rows(const Tensor& logits);

// Sum over `read_rows` of -log_probs[r][targets[r]].  Returns 0 for an
// empty read set.  Out-of-range rows or targets raise ContractViolation.
double masked_cross_entropy(const Tensor& log_probs,
                            const std::vector<int>& targets,
                            const std::vector<std::size_t>& read_rows);

}  // namespace mtlm

#endif  // MTLM_TENSOR_H_
