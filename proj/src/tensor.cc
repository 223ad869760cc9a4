// src/tensor.cc

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

#include "mtlm/tensor.h"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "mtlm/errors.h"

namespace mtlm {

namespace {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

ECMap map_of(const Tensor& t) {
  MTLM_CHECK(t.ndim() == 2, "gemm operand must be 2-D");
  return ECMap(t.data.data(), static_cast<Eigen::Index>(t.rows()),
               static_cast<Eigen::Index>(t.cols()));
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> s, double fill) : shape(std::move(s)) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  data.assign(n, fill);
}

bool Tensor::all_finite() const {
  return std::all_of(data.begin(), data.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::fill(double v) { std::fill(data.begin(), data.end(), v); }

Tensor gemm(const Tensor& a, bool trans_a, const Tensor& b, bool trans_b) {
  const std::size_t m = trans_a ? a.cols() : a.rows();
  const std::size_t k = trans_a ? a.rows() : a.cols();
  const std::size_t kb = trans_b ? b.cols() : b.rows();
  const std::size_t n = trans_b ? b.rows() : b.cols();
  MTLM_CHECK(k == kb, "gemm inner dimensions do not match");
  Tensor c = Tensor::matrix(m, n);
  gemm_accum(c, a, trans_a, b, trans_b);
  return c;
}

void gemm_accum(Tensor& c, const Tensor& a, bool trans_a, const Tensor& b,
                bool trans_b) {
  auto am = map_of(a);
  auto bm = map_of(b);
  EMap cm(c.data.data(), static_cast<Eigen::Index>(c.rows()),
          static_cast<Eigen::Index>(c.cols()));
  if (!trans_a && !trans_b) {
    MTLM_CHECK(a.cols() == b.rows() && c.rows() == a.rows() && c.cols() == b.cols(),
               "gemm_accum shape mismatch");
    cm.noalias() += am * bm;
  } else if (trans_a && !trans_b) {
    MTLM_CHECK(a.rows() == b.rows() && c.rows() == a.cols() && c.cols() == b.cols(),
               "gemm_accum shape mismatch");
    cm.noalias() += am.transpose() * bm;
  } else if (!trans_a && trans_b) {
    MTLM_CHECK(a.cols() == b.cols() && c.rows() == a.rows() && c.cols() == b.rows(),
               "gemm_accum shape mismatch");
    cm.noalias() += am * bm.transpose();
  } else {
    MTLM_CHECK(a.rows() == b.cols() && c.rows() == a.cols() && c.cols() == b.rows(),
               "gemm_accum shape mismatch");
    cm.noalias() += am.transpose() * bm.transpose();
  }
}

Tensor softmax_rows(const Tensor& logits) {
  MTLM_CHECK(logits.ndim() == 2, "softmax_rows expects a 2-D tensor");
  if (!logits.all_finite()) {
    throw DataError("softmax_rows: non-finite input");
  }
  const std::size_t n = logits.rows(), v = logits.cols();
  Tensor out = Tensor::matrix(n, v);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &logits.data[i * v];
    double m = row[0];
    for (std::size_t j = 1; j < v; ++j) m = std::max(m, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < v; ++j) {
      const double e = std::exp(row[j] - m);
      out.data[i * v + j] = e;
      z += e;
    }
    for (std::size_t j = 0; j < v; ++j) out.data[i * v + j] /= z;
  }
  return out;
}

double masked_cross_entropy(const Tensor& log_probs,
                            const std::vector<int>& targets,
                            const std::vector<std::size_t>& read_rows) {
  MTLM_CHECK(log_probs.ndim() == 2, "masked_cross_entropy expects 2-D log-probs");
  const std::size_t n = log_probs.rows(), v = log_probs.cols();
  double loss = 0.0;
  for (std::size_t r : read_rows) {
    MTLM_CHECK(r < n, "masked_cross_entropy: read row " + std::to_string(r) +
                          " out of range");
    MTLM_CHECK(r < targets.size(), "masked_cross_entropy: no target for row " +
                                       std::to_string(r));
    const int t = targets[r];
    MTLM_CHECK(t >= 0 && static_cast<std::size_t>(t) < v,
               "masked_cross_entropy: target id out of range");
    loss -= log_probs.at(r, static_cast<std::size_t>(t));
  }
  return loss;
}

}  // namespace mtlm
