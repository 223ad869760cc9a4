// src/model.cc

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

#include "mtlm/model.h"

#include <cmath>
#include <limits>

#include "mtlm/errors.h"
#include "mtlm/tokenizer.h"

namespace mtlm {

void ModelConfig::validate() const {
  MTLM_CHECK(n_layers >= 1 && n_heads >= 1 && d_model >= 1 && d_ff >= 1 &&
                 vocab_size >= 1 && max_len >= 2,
             "ModelConfig: sizes must be >= 1 (max_len >= 2)");
  MTLM_CHECK(d_model % n_heads == 0, "ModelConfig: d_model not divisible by n_heads");
  MTLM_CHECK(dropout >= 0.0 && dropout < 1.0, "ModelConfig: dropout must be in [0,1)");
  MTLM_CHECK(activation == "gelu" || activation == "relu",
             "ModelConfig: unknown activation");
}

ModelConfig ModelConfig::paper_scale() {
  ModelConfig c;
  c.n_layers = 6;
  c.n_heads = 12;
  c.d_model = 768;
  c.d_ff = 3072;
  c.vocab_size = 7002;
  c.max_len = 512;
  return c;
}

std::vector<std::pair<std::string, nn::VarPtr>> ModelParams::named() const {
  std::vector<std::pair<std::string, nn::VarPtr>> out;
  out.emplace_back("tok_emb", tok_emb);
  out.emplace_back("pos_emb", pos_emb);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const Block& b = blocks[i];
    const std::string p = "block" + std::to_string(i) + ".";
    out.emplace_back(p + "ln1_gain", b.ln1_gain);
    out.emplace_back(p + "ln1_bias", b.ln1_bias);
    out.emplace_back(p + "wq", b.wq);
    out.emplace_back(p + "bq", b.bq);
    out.emplace_back(p + "wk", b.wk);
    out.emplace_back(p + "bk", b.bk);
    out.emplace_back(p + "wv", b.wv);
    out.emplace_back(p + "bv", b.bv);
    out.emplace_back(p + "wo", b.wo);
    out.emplace_back(p + "bo", b.bo);
    out.emplace_back(p + "ln2_gain", b.ln2_gain);
    out.emplace_back(p + "ln2_bias", b.ln2_bias);
    out.emplace_back(p + "w1", b.w1);
    out.emplace_back(p + "b1", b.b1);
    out.emplace_back(p + "w2", b.w2);
    out.emplace_back(p + "b2", b.b2);
  }
  out.emplace_back("out_w", out_w);
  out.emplace_back("out_b", out_b);
  return out;
}

std::vector<Tensor*> ModelParams::values() const {
  std::vector<Tensor*> out;
  for (const auto& [name, var] : named()) {
    (void)name;
    out.push_back(&var->value);
  }
  return out;
}

std::vector<Tensor> ModelParams::snapshot_values() const {
  std::vector<Tensor> out;
  for (const auto& [name, var] : named()) {
    (void)name;
    out.push_back(var->value);
  }
  return out;
}

std::vector<Tensor> ModelParams::snapshot_grads() const {
  std::vector<Tensor> out;
  for (const auto& [name, var] : named()) {
    (void)name;
    var->ensure_grad();
    out.push_back(var->grad);
  }
  return out;
}

void ModelParams::zero_grads() const {
  for (const auto& [name, var] : named()) {
    (void)name;
    var->ensure_grad();
    var->zero_grad();
  }
}

std::size_t ModelParams::parameter_count() const {
  std::size_t total = 0;
  for (const auto& [name, var] : named()) {
    (void)name;
    total += var->value.numel();
  }
  return total;
}

namespace {

Tensor normal_tensor(std::vector<std::size_t> shape, double std_dev, Rng& rng) {
  Tensor t(std::move(shape));
  for (double& d : t.data) d = std_dev * rng.normal();
  return t;
}

Tensor sinusoidal_positions(std::size_t max_len, std::size_t d) {
  Tensor t = Tensor::matrix(max_len, d);
  for (std::size_t p = 0; p < max_len; ++p) {
    for (std::size_t j = 0; j < d; ++j) {
      const double exponent = static_cast<double>(2 * (j / 2)) / static_cast<double>(d);
      const double angle = static_cast<double>(p) / std::pow(10000.0, exponent);
      t.at(p, j) = (j % 2 == 0) ? std::sin(angle) : std::cos(angle);
    }
  }
  return t;
}

}  // namespace

Model init_model(const ModelConfig& config, Rng& rng) {
  config.validate();
  const std::size_t d = config.d_model, v = config.vocab_size, f = config.d_ff;
  constexpr double kStd = 0.02;
  Model m;
  m.config = config;
  ModelParams& p = m.params;
  p.tok_emb = nn::parameter(normal_tensor({v, d}, kStd, rng));
  p.pos_emb = config.learned_positions
                  ? nn::parameter(normal_tensor({config.max_len, d}, kStd, rng))
                  : nn::parameter(sinusoidal_positions(config.max_len, d));
  for (std::size_t i = 0; i < config.n_layers; ++i) {
    ModelParams::Block b;
    b.ln1_gain = nn::parameter(Tensor({d}, 1.0));
    b.ln1_bias = nn::parameter(Tensor({d}, 0.0));
    b.wq = nn::parameter(normal_tensor({d, d}, kStd, rng));
    b.bq = nn::parameter(Tensor({d}, 0.0));
    b.wk = nn::parameter(normal_tensor({d, d}, kStd, rng));
    b.bk = nn::parameter(Tensor({d}, 0.0));
    b.wv = nn::parameter(normal_tensor({d, d}, kStd, rng));
    b.bv = nn::parameter(Tensor({d}, 0.0));
    b.wo = nn::parameter(normal_tensor({d, d}, kStd, rng));
    b.bo = nn::parameter(Tensor({d}, 0.0));
    b.ln2_gain = nn::parameter(Tensor({d}, 1.0));
    b.ln2_bias = nn::parameter(Tensor({d}, 0.0));
    b.w1 = nn::parameter(normal_tensor({d, f}, kStd, rng));
    b.b1 = nn::parameter(Tensor({f}, 0.0));
    b.w2 = nn::parameter(normal_tensor({f, d}, kStd, rng));
    b.b2 = nn::parameter(Tensor({d}, 0.0));
    p.blocks.push_back(std::move(b));
  }
  p.out_w = nn::parameter(normal_tensor({d, v}, kStd, rng));
  p.out_b = nn::parameter(Tensor({v}, 0.0));
  return m;
}

namespace {

nn::VarPtr activation_of(const ModelConfig& cfg, const nn::VarPtr& x) {
  return cfg.activation == "relu" ? nn::relu(x) : nn::gelu(x);
}

nn::VarPtr maybe_dropout(const ModelConfig& cfg, const nn::VarPtr& x, Rng* rng) {
  if (rng == nullptr || cfg.dropout <= 0.0) return x;
  Tensor keep(x->value.shape);
  const double scale = 1.0 / (1.0 - cfg.dropout);
  for (double& d : keep.data) {
    d = rng->uniform() < cfg.dropout ? 0.0 : scale;
  }
  return nn::dropout(x, keep);
}

}  // namespace

nn::VarPtr forward(const Model& model, const std::vector<int>& ids,
                   const AttentionMask& mask, Rng* dropout_rng) {
  const ModelConfig& cfg = model.config;
  const ModelParams& p = model.params;
  const std::size_t n = ids.size();
  MTLM_CHECK(n >= 1, "forward: empty sequence");
  MTLM_CHECK(n == mask.n(), "forward: sequence/mask length mismatch");
  MTLM_CHECK(n <= cfg.max_len, "forward: sequence exceeds max_len");

  std::vector<int> positions(n);
  for (std::size_t i = 0; i < n; ++i) positions[i] = static_cast<int>(i);
  nn::VarPtr x = nn::add(nn::embedding(p.tok_emb, ids),
                         nn::embedding(p.pos_emb, positions));
  for (const ModelParams::Block& b : p.blocks) {
    if (cfg.pre_norm) {
      nn::VarPtr a = nn::layer_norm(x, b.ln1_gain, b.ln1_bias);
      nn::VarPtr q = nn::add_row_bias(nn::matmul(a, b.wq), b.bq);
      nn::VarPtr k = nn::add_row_bias(nn::matmul(a, b.wk), b.bk);
      nn::VarPtr v = nn::add_row_bias(nn::matmul(a, b.wv), b.bv);
      nn::VarPtr att = nn::attention(q, k, v, mask, cfg.n_heads);
      nn::VarPtr o = nn::add_row_bias(nn::matmul(att, b.wo), b.bo);
      x = nn::add(x, maybe_dropout(cfg, o, dropout_rng));
      nn::VarPtr f = nn::layer_norm(x, b.ln2_gain, b.ln2_bias);
      nn::VarPtr h = activation_of(cfg, nn::add_row_bias(nn::matmul(f, b.w1), b.b1));
      nn::VarPtr h2 = nn::add_row_bias(nn::matmul(h, b.w2), b.b2);
      x = nn::add(x, maybe_dropout(cfg, h2, dropout_rng));
    } else {
      nn::VarPtr q = nn::add_row_bias(nn::matmul(x, b.wq), b.bq);
      nn::VarPtr k = nn::add_row_bias(nn::matmul(x, b.wk), b.bk);
      nn::VarPtr v = nn::add_row_bias(nn::matmul(x, b.wv), b.bv);
      nn::VarPtr att = nn::attention(q, k, v, mask, cfg.n_heads);
      nn::VarPtr o = nn::add_row_bias(nn::matmul(att, b.wo), b.bo);
      x = nn::layer_norm(nn::add(x, maybe_dropout(cfg, o, dropout_rng)),
                         b.ln1_gain, b.ln1_bias);
      nn::VarPtr h = activation_of(cfg, nn::add_row_bias(nn::matmul(x, b.w1), b.b1));
      nn::VarPtr h2 = nn::add_row_bias(nn::matmul(h, b.w2), b.b2);
      x = nn::layer_norm(nn::add(x, maybe_dropout(cfg, h2, dropout_rng)),
                         b.ln2_gain, b.ln2_bias);
    }
  }
  nn::VarPtr logits = nn::add_row_bias(nn::matmul(x, p.out_w), p.out_b);
  return nn::log_softmax_rows(logits);
}

// ---------------------------------------------------------------------------
// Batched grad-free inference.  Linear layers run once over the stacked
// [B*Lmax, d] matrix; attention and normalization act per row / per
// sequence, so each sequence's rows match the single-sequence forward.
// ---------------------------------------------------------------------------

namespace {

void batch_layer_norm(Tensor& x, const Tensor& gain, const Tensor& bias,
                      double eps = 1e-5) {
  const std::size_t n = x.rows(), m = x.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* row = &x.data[i * m];
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
    for (std::size_t j = 0; j < m; ++j) {
      row[j] = (row[j] - mean) * is * gain.data[j] + bias.data[j];
    }
  }
}

void batch_add_bias(Tensor& x, const Tensor& bias) {
  const std::size_t n = x.rows(), m = x.cols();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) x.data[i * m + j] += bias.data[j];
  }
}

void batch_activation(const ModelConfig& cfg, Tensor& x) {
  constexpr double kInvSqrt2 = 0.7071067811865475244;
  if (cfg.activation == "relu") {
    for (double& d : x.data) d = d > 0.0 ? d : 0.0;
  } else {
    for (double& d : x.data) d = d * 0.5 * (1.0 + std::erf(d * kInvSqrt2));
  }
}

void batch_log_softmax(Tensor& x) {
  const std::size_t n = x.rows(), m = x.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* row = &x.data[i * m];
    double mx = row[0];
    for (std::size_t j = 1; j < m; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) z += std::exp(row[j] - mx);
    const double lz = mx + std::log(z);
    for (std::size_t j = 0; j < m; ++j) row[j] -= lz;
  }
}

// Attention over one sequence's row range [base, base+len) of the stacked
// matrices, with the same skip-blocked-keys evaluation as nn::attention.
void batch_attention(const Tensor& q, const Tensor& k, const Tensor& v,
                     Tensor& out, std::size_t base, std::size_t len,
                     const AttentionMask& mask, std::size_t n_heads) {
  const std::size_t d = q.cols();
  const std::size_t dk = d / n_heads;
  const double att_scale = 1.0 / std::sqrt(static_cast<double>(dk));
  std::vector<double> scores(len);
  for (std::size_t h = 0; h < n_heads; ++h) {
    const std::size_t c0 = h * dk;
    for (std::size_t qr = 0; qr < len; ++qr) {
      double max_s = -std::numeric_limits<double>::infinity();
      for (std::size_t kr = 0; kr < len; ++kr) {
        if (!mask.allowed(qr, kr)) continue;
        double s = 0.0;
        for (std::size_t j = 0; j < dk; ++j) {
          s += q.at(base + qr, c0 + j) * k.at(base + kr, c0 + j);
        }
        s *= att_scale;
        scores[kr] = s;
        max_s = std::max(max_s, s);
      }
      if (!std::isfinite(max_s)) continue;
      double z = 0.0;
      for (std::size_t kr = 0; kr < len; ++kr) {
        if (!mask.allowed(qr, kr)) continue;
        scores[kr] = std::exp(scores[kr] - max_s);
        z += scores[kr];
      }
      for (std::size_t kr = 0; kr < len; ++kr) {
        if (!mask.allowed(qr, kr)) continue;
        const double w = scores[kr] / z;
        for (std::size_t j = 0; j < dk; ++j) {
          out.at(base + qr, c0 + j) += w * v.at(base + kr, c0 + j);
        }
      }
    }
  }
}

}  // namespace

std::vector<Tensor> forward_batch(const Model& model,
                                  const std::vector<std::vector<int>>& ids,
                                  const std::vector<AttentionMask>& masks) {
  const ModelConfig& cfg = model.config;
  const ModelParams& p = model.params;
  const std::size_t batch = ids.size();
  MTLM_CHECK(batch >= 1, "forward_batch: empty batch");
  MTLM_CHECK(masks.size() == batch, "forward_batch: ids/masks count mismatch");

  std::size_t l_max = 0;
  for (std::size_t b = 0; b < batch; ++b) {
    MTLM_CHECK(!ids[b].empty() && ids[b].size() <= cfg.max_len,
               "forward_batch: sequence length out of range");
    MTLM_CHECK(masks[b].n() == ids[b].size(), "forward_batch: mask length mismatch");
    l_max = std::max(l_max, ids[b].size());
  }

  // Per-sequence masks extended to l_max: pad keys blocked, pad query rows
  // attend only themselves so no row is left without a key.
  std::vector<AttentionMask> padded_masks;
  padded_masks.reserve(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t n = ids[b].size();
    AttentionMask m(l_max);
    for (std::size_t q = 0; q < l_max; ++q) {
      for (std::size_t k = 0; k < l_max; ++k) {
        const bool ok = (q < n && k < n) ? masks[b].allowed(q, k) : (q == k);
        if (!ok) m.block(q, k);
      }
    }
    padded_masks.push_back(std::move(m));
  }

  const std::size_t d = cfg.d_model;
  Tensor x = Tensor::matrix(batch * l_max, d);
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t i = 0; i < l_max; ++i) {
      const int tok = i < ids[b].size() ? ids[b][i] : Vocab::kPad;
      MTLM_CHECK(tok >= 0 && static_cast<std::size_t>(tok) < cfg.vocab_size,
                 "forward_batch: token id out of range");
      for (std::size_t j = 0; j < d; ++j) {
        x.at(b * l_max + i, j) = p.tok_emb->value.at(static_cast<std::size_t>(tok), j) +
                                 p.pos_emb->value.at(i, j);
      }
    }
  }

  for (const ModelParams::Block& blk : p.blocks) {
    if (cfg.pre_norm) {
      Tensor a = x;
      batch_layer_norm(a, blk.ln1_gain->value, blk.ln1_bias->value);
      Tensor q = gemm(a, false, blk.wq->value, false);
      batch_add_bias(q, blk.bq->value);
      Tensor k = gemm(a, false, blk.wk->value, false);
      batch_add_bias(k, blk.bk->value);
      Tensor v = gemm(a, false, blk.wv->value, false);
      batch_add_bias(v, blk.bv->value);
      Tensor att = Tensor::matrix(batch * l_max, d);
      for (std::size_t b = 0; b < batch; ++b) {
        batch_attention(q, k, v, att, b * l_max, l_max, padded_masks[b], cfg.n_heads);
      }
      Tensor o = gemm(att, false, blk.wo->value, false);
      batch_add_bias(o, blk.bo->value);
      for (std::size_t i = 0; i < x.numel(); ++i) x.data[i] += o.data[i];
      Tensor f = x;
      batch_layer_norm(f, blk.ln2_gain->value, blk.ln2_bias->value);
      Tensor h = gemm(f, false, blk.w1->value, false);
      batch_add_bias(h, blk.b1->value);
      batch_activation(cfg, h);
      Tensor h2 = gemm(h, false, blk.w2->value, false);
      batch_add_bias(h2, blk.b2->value);
      for (std::size_t i = 0; i < x.numel(); ++i) x.data[i] += h2.data[i];
    } else {
      Tensor q = gemm(x, false, blk.wq->value, false);
      batch_add_bias(q, blk.bq->value);
      Tensor k = gemm(x, false, blk.wk->value, false);
      batch_add_bias(k, blk.bk->value);
      Tensor v = gemm(x, false, blk.wv->value, false);
      batch_add_bias(v, blk.bv->value);
      Tensor att = Tensor::matrix(batch * l_max, d);
      for (std::size_t b = 0; b < batch; ++b) {
        batch_attention(q, k, v, att, b * l_max, l_max, padded_masks[b], cfg.n_heads);
      }
      Tensor o = gemm(att, false, blk.wo->value, false);
      batch_add_bias(o, blk.bo->value);
      for (std::size_t i = 0; i < x.numel(); ++i) x.data[i] += o.data[i];
      batch_layer_norm(x, blk.ln1_gain->value, blk.ln1_bias->value);
      Tensor h = gemm(x, false, blk.w1->value, false);
      batch_add_bias(h, blk.b1->value);
      batch_activation(cfg, h);
      Tensor h2 = gemm(h, false, blk.w2->value, false);
      batch_add_bias(h2, blk.b2->value);
      for (std::size_t i = 0; i < x.numel(); ++i) x.data[i] += h2.data[i];
      batch_layer_norm(x, blk.ln2_gain->value, blk.ln2_bias->value);
    }
  }

  Tensor logits = gemm(x, false, p.out_w->value, false);
  batch_add_bias(logits, p.out_b->value);
  batch_log_softmax(logits);

  std::vector<Tensor> out;
  out.reserve(batch);
  const std::size_t v_size = cfg.vocab_size;
  for (std::size_t b = 0; b < batch; ++b) {
    const std::size_t n = ids[b].size();
    Tensor lp = Tensor::matrix(n, v_size);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < v_size; ++j) {
        lp.at(i, j) = logits.at(b * l_max + i, j);
      }
    }
    out.push_back(std::move(lp));
  }
  return out;
}

}  // namespace mtlm
