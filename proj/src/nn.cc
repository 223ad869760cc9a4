// src/nn.cc

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

#include "mtlm/nn.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "mtlm/errors.h"

namespace mtlm {
namespace nn {

namespace {

std::atomic<long> g_next_id{0};

VarPtr make_node(Tensor value, std::vector<VarPtr> parents) {
  auto v = std::make_shared<Var>();
  v->value = std::move(value);
  for (const auto& p : parents) {
    if (p->requires_grad) v->requires_grad = true;
  }
  v->parents = std::move(parents);
  v->id = g_next_id.fetch_add(1, std::memory_order_relaxed);
  return v;
}

constexpr double kInvSqrt2 = 0.7071067811865475244;
constexpr double kInvSqrt2Pi = 0.3989422804014326779;

double norm_cdf(double x) { return 0.5 * (1.0 + std::erf(x * kInvSqrt2)); }
double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

}  // namespace

VarPtr constant(Tensor value) {
  auto v = make_node(std::move(value), {});
  v->requires_grad = false;
  return v;
}

VarPtr parameter(Tensor value) {
  auto v = make_node(std::move(value), {});
  v->requires_grad = true;
  v->ensure_grad();
  return v;
}

VarPtr add(const VarPtr& a, const VarPtr& b) {
  MTLM_CHECK(a->value.same_shape(b->value), "add: shape mismatch");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] += b->value.data[i];
  auto v = make_node(std::move(out), {a, b});
  if (v->requires_grad) {
    Var* vr = v.get();
    Var* ar = a.get();
    Var* br = b.get();
    v->backprop = [vr, ar, br] {
      const Tensor& g = vr->grad;
      if (ar->requires_grad) {
        for (std::size_t i = 0; i < g.numel(); ++i) ar->grad.data[i] += g.data[i];
      }
      if (br->requires_grad) {
        for (std::size_t i = 0; i < g.numel(); ++i) br->grad.data[i] += g.data[i];
      }
    };
  }
  return v;
}

VarPtr add_row_bias(const VarPtr& x, const VarPtr& bias) {
  MTLM_CHECK(x->value.ndim() == 2 && bias->value.ndim() == 1 &&
                 x->value.cols() == bias->value.shape[0],
             "add_row_bias: shape mismatch");
  const std::size_t n = x->value.rows(), m = x->value.cols();
  Tensor out = x->value;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out.data[i * m + j] += bias->value.data[j];
  }
  auto v = make_node(std::move(out), {x, bias});
  if (v->requires_grad) {
    Var* vr = v.get();
    Var* xr = x.get();
    Var* br = bias.get();
    v->backprop = [vr, xr, br, n, m] {
      const Tensor& g = vr->grad;
      if (xr->requires_grad) {
        for (std::size_t i = 0; i < g.numel(); ++i) xr->grad.data[i] += g.data[i];
      }
      if (br->requires_grad) {
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < m; ++j) br->grad.data[j] += g.data[i * m + j];
        }
      }
    };
  }
  return v;
}

VarPtr matmul(const VarPtr& a, const VarPtr& b, bool trans_a, bool trans_b) {
  Tensor out = gemm(a->value, trans_a, b->value, trans_b);
  auto v = make_node(std::move(out), {a, b});
  if (v->requires_grad) {
    Var* vr = v.get();
    Var* ar = a.get();
    Var* br = b.get();
    v->backprop = [vr, ar, br, trans_a, trans_b] {
      const Tensor& g = vr->grad;
      if (ar->requires_grad) {
        if (!trans_a && !trans_b) {
          gemm_accum(ar->grad, g, false, br->value, true);
        } else if (trans_a && !trans_b) {
          gemm_accum(ar->grad, br->value, false, g, true);
        } else if (!trans_a && trans_b) {
          gemm_accum(ar->grad, g, false, br->value, false);
        } else {
          gemm_accum(ar->grad, br->value, true, g, true);
        }
      }
      if (br->requires_grad) {
        if (!trans_a && !trans_b) {
          gemm_accum(br->grad, ar->value, true, g, false);
        } else if (trans_a && !trans_b) {
          gemm_accum(br->grad, ar->value, false, g, false);
        } else if (!trans_a && trans_b) {
          gemm_accum(br->grad, g, true, ar->value, false);
        } else {
          gemm_accum(br->grad, g, true, ar->value, true);
        }
      }
    };
  }
  return v;
}

VarPtr scale(const VarPtr& x, double c) {
  Tensor out = x->value;
  for (double& d : out.data) d *= c;
  auto v = make_node(std::move(out), {x});
  if (v->requires_grad) {
    Var* vr = v.get();
    Var* xr = x.get();
    v->backprop = [vr, xr, c] {
      for (std::size_t i = 0; i < vr->grad.numel(); ++i) {
        xr->grad.data[i] += c * vr->grad.data[i];
      }
    };
  }
  return v;
}

VarPtr mul(const VarPtr& a, const VarPtr& b) {
  MTLM_CHECK(a->value.same_shape(b->value), "mul: shape mismatch");
  Tensor out = a->value;
  for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] *= b->value.data[i];
  auto v = make_node(std::move(out), {a, b});
  if (v->requires_grad) {
    Var* vr = v.get();
    Var* ar = a.get();
    Var* br = b.get();
    v->backprop = [vr, ar, br] {
      const Tensor& g = vr->grad;
      if (ar->requires_grad) {
        for (std::size_t i = 0; i < g.numel(); ++i) {
          ar->grad.data[i] += g.data[i] * br->value.data[i];
        }
      }
      if (br->requires_grad) {
        for (std::size_t i = 0; i < g.numel(); ++i) {
          br->grad.data[i] += g.data[i] * ar->value.data[i];
        }
      }
    };
  }
  return v;
}

VarPtr gelu(const VarPtr& x) {
  Tensor out = x->value;
  for (std::size_t i = 0; i < out.numel(); ++i) {
    out.data[i] = x->value.data[i] * norm_cdf(x->value.data[i]);
  }
  auto v = make_node(std::move(out), {x});
  if (v->requires_grad) {
    Var* vr = v.get();
    Var* xr = x.get();
    v->backprop = [vr, xr] {
      for (std::size_t i = 0; i < vr->grad.numel(); ++i) {
        const double xi = xr->value.data[i];
        xr->grad.data[i] += vr->grad.data[i] * (norm_cdf(xi) + xi * norm_pdf(xi));
      }
    };
  }
  return v;
}

VarPtr relu(const VarPtr& x) {
  Tensor out = x->value;
  for (double& d : out.data) d = d > 0.0 ? d : 0.0;
  auto v = make_node(std::move(out), {x});
  if (v->requires_grad) {
    Var* vr = v.get();
    Var* xr = x.get();
    v->backprop = [vr, xr] {
      for (std::size_t i = 0; i < vr->grad.numel(); ++i) {
        if (xr->value.data[i] > 0.0) xr->grad.data[i] += vr->grad.data[i];
      }
    };
  }
  return v;
}

VarPtr layer_norm(const VarPtr& x, const VarPtr& gain, const VarPtr& bias,
                  double eps) {
  MTLM_CHECK(x->value.ndim() == 2, "layer_norm expects a 2-D input");
  const std::size_t n = x->value.rows(), m = x->value.cols();
  MTLM_CHECK(gain->value.numel() == m && bias->value.numel() == m,
             "layer_norm: gain/bias size mismatch");
  Tensor out = Tensor::matrix(n, m);
  auto xhat = std::make_shared<Tensor>(Tensor::matrix(n, m));
  auto inv_std = std::make_shared<std::vector<double>>(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &x->value.data[i * m];
    double mean = 0.0;
    for (std::size_t j = 0; j < m; ++j) mean += row[j];
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double d = row[j] - mean;
      var += d * d;
    }
    var /= static_cast<double>(m);
    const double is = 1.0 / std::sqrt(var + eps);
    (*inv_std)[i] = is;
    for (std::size_t j = 0; j < m; ++j) {
      const double xh = (row[j] - mean) * is;
      xhat->data[i * m + j] = xh;
      out.data[i * m + j] = xh * gain->value.data[j] + bias->value.data[j];
    }
  }
  auto v = make_node(std::move(out), {x, gain, bias});
  if (v->requires_grad) {
    Var* vr = v.get();
    Var* xr = x.get();
    Var* gr = gain.get();
    Var* br = bias.get();
    v->backprop = [vr, xr, gr, br, xhat, inv_std, n, m] {
      const Tensor& g = vr->grad;
      for (std::size_t i = 0; i < n; ++i) {
        const double* grow = &g.data[i * m];
        const double* xh = &xhat->data[i * m];
        if (gr->requires_grad || br->requires_grad) {
          for (std::size_t j = 0; j < m; ++j) {
            if (gr->requires_grad) gr->grad.data[j] += grow[j] * xh[j];
            if (br->requires_grad) br->grad.data[j] += grow[j];
          }
        }
        if (xr->requires_grad) {
          double mean_dxhat = 0.0, mean_dxhat_xhat = 0.0;
          for (std::size_t j = 0; j < m; ++j) {
            const double dxh = grow[j] * gr->value.data[j];
            mean_dxhat += dxh;
            mean_dxhat_xhat += dxh * xh[j];
          }
          mean_dxhat /= static_cast<double>(m);
          mean_dxhat_xhat /= static_cast<double>(m);
          const double is = (*inv_std)[i];
          for (std::size_t j = 0; j < m; ++j) {
            const double dxh = grow[j] * gr->value.data[j];
            xr->grad.data[i * m + j] +=
                is * (dxh - mean_dxhat - xh[j] * mean_dxhat_xhat);
          }
        }
      }
    };
  }
  return v;
}

VarPtr attention(const VarPtr& q, const VarPtr& k, const VarPtr& v,
                 const AttentionMask& mask, std::size_t n_heads) {
  const std::size_t n = q->value.rows(), d = q->value.cols();
  MTLM_CHECK(k->value.rows() == n && v->value.rows() == n &&
                 k->value.cols() == d && v->value.cols() == d,
             "attention: q/k/v shape mismatch");
  MTLM_CHECK(mask.n() == n, "attention: mask size mismatch");
  MTLM_CHECK(n_heads >= 1 && d % n_heads == 0,
             "attention: width not divisible by head count");
  const std::size_t dk = d / n_heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dk));

  // weights[h] is the n x n post-softmax matrix of head h; blocked pairs
  // hold exact zeros and are skipped in every loop, so no value at a
  // blocked key can perturb an allowed row even at the last bit.
  auto weights = std::make_shared<std::vector<Tensor>>();
  weights->reserve(n_heads);
  Tensor out = Tensor::matrix(n, d);
  for (std::size_t h = 0; h < n_heads; ++h) {
    const std::size_t c0 = h * dk;
    Tensor w = Tensor::matrix(n, n);
    for (std::size_t qr = 0; qr < n; ++qr) {
      double max_s = -std::numeric_limits<double>::infinity();
      for (std::size_t kr = 0; kr < n; ++kr) {
        if (!mask.allowed(qr, kr)) continue;
        double s = 0.0;
        for (std::size_t j = 0; j < dk; ++j) {
          s += q->value.at(qr, c0 + j) * k->value.at(kr, c0 + j);
        }
        s *= att_scale;
        w.at(qr, kr) = s;
        max_s = std::max(max_s, s);
      }
      if (!std::isfinite(max_s)) continue;  // fully blocked row: zero output
      double z = 0.0;
      for (std::size_t kr = 0; kr < n; ++kr) {
        if (!mask.allowed(qr, kr)) continue;
        const double e = std::exp(w.at(qr, kr) - max_s);
        w.at(qr, kr) = e;
        z += e;
      }
      for (std::size_t kr = 0; kr < n; ++kr) {
        if (!mask.allowed(qr, kr)) continue;
        w.at(qr, kr) /= z;
        const double wv = w.at(qr, kr);
        for (std::size_t j = 0; j < dk; ++j) {
          out.at(qr, c0 + j) += wv * v->value.at(kr, c0 + j);
        }
      }
    }
    weights->push_back(std::move(w));
  }

  auto node = make_node(std::move(out), {q, k, v});
  if (node->requires_grad) {
    Var* nr = node.get();
    Var* qr_ = q.get();
    Var* kr_ = k.get();
    Var* vr_ = v.get();
    AttentionMask mask_copy = mask;
    node->backprop = [nr, qr_, kr_, vr_, weights, mask_copy, n, dk, n_heads,
                      att_scale] {
      const Tensor& g = nr->grad;
      for (std::size_t h = 0; h < n_heads; ++h) {
        const std::size_t c0 = h * dk;
        const Tensor& w = (*weights)[h];
        for (std::size_t qrow = 0; qrow < n; ++qrow) {
          // dW and the softmax Jacobian, allowed keys only
          std::vector<double> dw(n, 0.0);
          double dot_dw_w = 0.0;
          for (std::size_t krow = 0; krow < n; ++krow) {
            if (!mask_copy.allowed(qrow, krow)) continue;
            double s = 0.0;
            for (std::size_t j = 0; j < dk; ++j) {
              s += g.at(qrow, c0 + j) * vr_->value.at(krow, c0 + j);
            }
            dw[krow] = s;
            dot_dw_w += s * w.at(qrow, krow);
          }
          for (std::size_t krow = 0; krow < n; ++krow) {
            if (!mask_copy.allowed(qrow, krow)) continue;
            const double wqk = w.at(qrow, krow);
            if (vr_->requires_grad) {
              for (std::size_t j = 0; j < dk; ++j) {
                vr_->grad.at(krow, c0 + j) += wqk * g.at(qrow, c0 + j);
              }
            }
            const double ds = att_scale * wqk * (dw[krow] - dot_dw_w);
            if (qr_->requires_grad) {
              for (std::size_t j = 0; j < dk; ++j) {
                qr_->grad.at(qrow, c0 + j) += ds * kr_->value.at(krow, c0 + j);
              }
            }
            if (kr_->requires_grad) {
              for (std::size_t j = 0; j < dk; ++j) {
                kr_->grad.at(krow, c0 + j) += ds * qr_->value.at(qrow, c0 + j);
              }
            }
          }
        }
      }
    };
  }
  return node;
}

VarPtr embedding(const VarPtr& table, const std::vector<int>& ids) {
  MTLM_CHECK(table->value.ndim() == 2, "embedding: table must be 2-D");
  const std::size_t rows = table->value.rows(), d = table->value.cols();
  Tensor out = Tensor::matrix(ids.size(), d);
  for (std::size_t i = 0; i < ids.size(); ++i) {
    MTLM_CHECK(ids[i] >= 0 && static_cast<std::size_t>(ids[i]) < rows,
               "embedding: id out of range");
    for (std::size_t j = 0; j < d; ++j) {
      out.at(i, j) = table->value.at(static_cast<std::size_t>(ids[i]), j);
    }
  }
  auto v = make_node(std::move(out), {table});
  if (v->requires_grad) {
    Var* vr = v.get();
    Var* tr = table.get();
    std::vector<int> ids_copy = ids;
    v->backprop = [vr, tr, ids_copy, d] {
      for (std::size_t i = 0; i < ids_copy.size(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          tr->grad.at(static_cast<std::size_t>(ids_copy[i]), j) += vr->grad.at(i, j);
        }
      }
    };
  }
  return v;
}

VarPtr log_softmax_rows(const VarPtr& x) {
  MTLM_CHECK(x->value.ndim() == 2, "log_softmax_rows expects a 2-D input");
  const std::size_t n = x->value.rows(), m = x->value.cols();
  Tensor out = Tensor::matrix(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = &x->value.data[i * m];
    double mx = row[0];
    for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) z += std::exp(row[j] - mx);
    const double lz = mx + std::log(z);
    for (std::size_t j = 0; j < m; ++j) out.data[i * m + j] = row[j] - lz;
  }
  auto v = make_node(std::move(out), {x});
  if (v->requires_grad) {
    Var* vr = v.get();
    Var* xr = x.get();
    v->backprop = [vr, xr, n, m] {
      for (std::size_t i = 0; i < n; ++i) {
        double gsum = 0.0;
        for (std::size_t j = 0; j < m; ++j) gsum += vr->grad.data[i * m + j];
        for (std::size_t j = 0; j < m; ++j) {
          xr->grad.data[i * m + j] +=
              vr->grad.data[i * m + j] - std::exp(vr->value.data[i * m + j]) * gsum;
        }
      }
    };
  }
  return v;
}

VarPtr nll(const VarPtr& log_probs, const std::vector<int>& targets,
           const std::vector<std::size_t>& read_rows) {
  const double loss = masked_cross_entropy(log_probs->value, targets, read_rows);
  auto v = make_node(Tensor::scalar(loss), {log_probs});
  if (v->requires_grad) {
    Var* vr = v.get();
    Var* lp = log_probs.get();
    std::vector<int> t_copy = targets;
    std::vector<std::size_t> r_copy = read_rows;
    v->backprop = [vr, lp, t_copy, r_copy] {
      const double g = vr->grad.data[0];
      for (std::size_t r : r_copy) {
        lp->grad.at(r, static_cast<std::size_t>(t_copy[r])) -= g;
      }
    };
  }
  return v;
}

VarPtr sum_all(const VarPtr& x) {
  double s = 0.0;
  for (double d : x->value.data) s += d;
  auto v = make_node(Tensor::scalar(s), {x});
  if (v->requires_grad) {
    Var* vr = v.get();
    Var* xr = x.get();
    v->backprop = [vr, xr] {
      const double g = vr->grad.data[0];
      for (double& d : xr->grad.data) d += g;
    };
  }
  return v;
}

VarPtr dropout(const VarPtr& x, const Tensor& keep_mask) {
  MTLM_CHECK(x->value.same_shape(keep_mask), "dropout: mask shape mismatch");
  Tensor out = x->value;
  for (std::size_t i = 0; i < out.numel(); ++i) out.data[i] *= keep_mask.data[i];
  auto v = make_node(std::move(out), {x});
  if (v->requires_grad) {
    Var* vr = v.get();
    Var* xr = x.get();
    auto mask_copy = std::make_shared<Tensor>(keep_mask);
    v->backprop = [vr, xr, mask_copy] {
      for (std::size_t i = 0; i < vr->grad.numel(); ++i) {
        xr->grad.data[i] += vr->grad.data[i] * mask_copy->data[i];
      }
    };
  }
  return v;
}

void backward(const VarPtr& loss) {
  MTLM_CHECK(loss->value.numel() == 1, "backward: loss must be a scalar");
  if (!loss->requires_grad) return;  // no parameter on the path
  // Collect the reachable subgraph.
  std::vector<Var*> order;
  std::unordered_set<Var*> seen;
  std::vector<Var*> stack{loss.get()};
  seen.insert(loss.get());
  while (!stack.empty()) {
    Var* cur = stack.back();
    stack.pop_back();
    order.push_back(cur);
    for (const auto& p : cur->parents) {
      if (seen.insert(p.get()).second) stack.push_back(p.get());
    }
  }
  for (Var* v : order) {
    if (v->requires_grad) v->ensure_grad();
  }
  loss->grad.data[0] = 1.0;
  std::sort(order.begin(), order.end(),
            [](const Var* a, const Var* b) { return a->id > b->id; });
  for (Var* v : order) {
    if (v->requires_grad && v->backprop) v->backprop();
  }
}

}  // namespace nn
}  // namespace mtlm
