// tests/test_model.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "mtlm/checkpoint.h"
#include "mtlm/errors.h"
#include "mtlm/model.h"
#include "mtlm/training.h"
#include "test_util.h"

using namespace mtlm;

TEST_CASE("init is deterministic and follows the initialization rules") {
  const ModelConfig cfg = mtlm_test::tiny_config(10, 2, 8, 2, 16, 16);
  Rng r1(21), r2(21), r3(22);
  Model a = init_model(cfg, r1);
  Model b = init_model(cfg, r2);
  Model c = init_model(cfg, r3);

  const auto na = a.params.named(), nb = b.params.named(), nc = c.params.named();
  bool any_differs_from_c = false;
  for (std::size_t i = 0; i < na.size(); ++i) {
    CHECK(na[i].second->value.data == nb[i].second->value.data);
    if (na[i].second->value.data != nc[i].second->value.data) any_differs_from_c = true;
  }
  CHECK(any_differs_from_c);

  for (const auto& blk : a.params.blocks) {
    for (double g : blk.ln1_gain->value.data) CHECK(g == 1.0);
    for (double g : blk.ln2_gain->value.data) CHECK(g == 1.0);
    for (double v : blk.bq->value.data) CHECK(v == 0.0);
  }
}

TEST_CASE("parameter count matches the closed-form shape arithmetic") {
  const ModelConfig cfg = mtlm_test::tiny_config(10, 2, 64, 2, 256, 32);
  Rng rng(1);
  Model m = init_model(cfg, rng);
  // V*d + max_len*d + L*(2*2d + 4*(d^2+d) + (d*ff+ff) + (ff*d+d)) + (d*V+V)
  CHECK(m.params.parameter_count() == 103306);
}

TEST_CASE("forward shape, normalization, and purity") {
  const ModelConfig cfg = mtlm_test::tiny_config(9, 2, 16, 2, 32, 24);
  Rng rng(4);
  Model m = init_model(cfg, rng);
  Rng seq_rng(8);
  const EncodedSequence seq = mtlm_test::random_sequence(8, cfg.vocab_size, seq_rng);
  const AttentionMask mask = ulm_mask(seq.length());

  nn::VarPtr lp1 = forward(m, seq.ids, mask);
  nn::VarPtr lp2 = forward(m, seq.ids, mask);
  CHECK(lp1->value.rows() == seq.length());
  CHECK(lp1->value.cols() == cfg.vocab_size);
  CHECK(lp1->value.data == lp2->value.data);  // bitwise repeatable

  for (std::size_t i = 0; i < lp1->value.rows(); ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < cfg.vocab_size; ++j) {
      CHECK(lp1->value.at(i, j) <= 0.0);
      sum += std::exp(lp1->value.at(i, j));
    }
    CHECK(std::abs(sum - 1.0) < 1e-9);
  }

  CHECK_THROWS_AS(forward(m, seq.ids, ulm_mask(seq.length() + 1)),
                  ContractViolation);
}

TEST_CASE("causality: perturbing a later token leaves earlier rows bitwise unchanged") {
  const ModelConfig cfg = mtlm_test::tiny_config(11, 2, 16, 2, 32, 24);
  Rng rng(14);
  Model m = init_model(cfg, rng);
  Rng seq_rng(15);
  EncodedSequence seq = mtlm_test::random_sequence(9, cfg.vocab_size, seq_rng);
  const AttentionMask mask = ulm_mask(seq.length());
  const Tensor base = forward(m, seq.ids, mask)->value;

  for (std::size_t j : {2u, 5u, 7u}) {
    std::vector<int> perturbed = seq.ids;
    perturbed[j] = perturbed[j] == 5 ? 6 : 5;
    const Tensor got = forward(m, perturbed, mask)->value;
    for (std::size_t row = 0; row < j; ++row) {
      for (std::size_t col = 0; col < cfg.vocab_size; ++col) {
        CHECK(got.at(row, col) == base.at(row, col));
      }
    }
  }
}

TEST_CASE("one-layer one-head forward matches straight-line arithmetic") {
  ModelConfig cfg;
  cfg.n_layers = 1;
  cfg.n_heads = 1;
  cfg.d_model = 2;
  cfg.d_ff = 2;
  cfg.vocab_size = 3;
  cfg.max_len = 4;
  Rng rng(0);
  Model m = init_model(cfg, rng);

  m.params.tok_emb->value.data = {0.1, -0.2, 0.05, 0.3, -0.15, 0.25};
  m.params.pos_emb->value.data = {0.02, 0.03, -0.01, 0.04, 0.0, 0.0, 0.0, 0.0};
  auto& blk = m.params.blocks[0];
  blk.ln1_gain->value.data = {1.1, 0.9};
  blk.ln1_bias->value.data = {0.01, -0.02};
  blk.wq->value.data = {0.2, -0.1, 0.15, 0.05};
  blk.bq->value.data = {0.01, 0.02};
  blk.wk->value.data = {-0.05, 0.2, 0.1, -0.15};
  blk.bk->value.data = {0.0, -0.01};
  blk.wv->value.data = {0.3, 0.1, -0.2, 0.25};
  blk.bv->value.data = {0.02, 0.0};
  blk.wo->value.data = {0.25, -0.3, 0.05, 0.2};
  blk.bo->value.data = {-0.01, 0.01};
  blk.ln2_gain->value.data = {0.95, 1.05};
  blk.ln2_bias->value.data = {0.0, 0.015};
  blk.w1->value.data = {0.4, -0.25, 0.3, 0.2};
  blk.b1->value.data = {0.05, -0.05};
  blk.w2->value.data = {-0.35, 0.15, 0.1, 0.45};
  blk.b2->value.data = {0.0, 0.02};
  m.params.out_w->value.data = {0.5, -0.4, 0.1, -0.2, 0.3, 0.25};
  m.params.out_b->value.data = {0.01, -0.01, 0.0};

  const std::vector<int> ids{0, 2};
  const Tensor got = forward(m, ids, causal_mask(2))->value;

  // Independent scalar recomputation.
  using Vec2 = std::array<double, 2>;
  auto layer_norm2 = [](Vec2 x, Vec2 g, Vec2 b) {
    const double mean = (x[0] + x[1]) / 2.0;
    const double var = ((x[0] - mean) * (x[0] - mean) + (x[1] - mean) * (x[1] - mean)) / 2.0;
    const double is = 1.0 / std::sqrt(var + 1e-5);
    return Vec2{(x[0] - mean) * is * g[0] + b[0], (x[1] - mean) * is * g[1] + b[1]};
  };
  auto matvec = [](Vec2 x, const std::vector<double>& w, const std::vector<double>& b) {
    // w row-major [2][2]
    return Vec2{x[0] * w[0] + x[1] * w[2] + b[0], x[0] * w[1] + x[1] * w[3] + b[1]};
  };
  auto gelu1 = [](double x) { return x * 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); };

  Vec2 x0{0.1 + 0.02, -0.2 + 0.03};
  Vec2 x1{-0.15 + -0.01, 0.25 + 0.04};
  Vec2 g1{1.1, 0.9}, b1v{0.01, -0.02};
  Vec2 a0 = layer_norm2(x0, g1, b1v);
  Vec2 a1 = layer_norm2(x1, g1, b1v);
  Vec2 q0 = matvec(a0, blk.wq->value.data, blk.bq->value.data);
  Vec2 q1 = matvec(a1, blk.wq->value.data, blk.bq->value.data);
  (void)q0;
  Vec2 k0 = matvec(a0, blk.wk->value.data, blk.bk->value.data);
  Vec2 k1 = matvec(a1, blk.wk->value.data, blk.bk->value.data);
  Vec2 v0 = matvec(a0, blk.wv->value.data, blk.bv->value.data);
  Vec2 v1 = matvec(a1, blk.wv->value.data, blk.bv->value.data);

  // row 0 attends only itself; row 1 attends both keys
  Vec2 att0 = v0;
  const double inv_sqrt_dk = 1.0 / std::sqrt(2.0);
  const double s10 = (q1[0] * k0[0] + q1[1] * k0[1]) * inv_sqrt_dk;
  const double s11 = (q1[0] * k1[0] + q1[1] * k1[1]) * inv_sqrt_dk;
  const double mx = std::max(s10, s11);
  const double e0 = std::exp(s10 - mx), e1 = std::exp(s11 - mx);
  const double w0 = e0 / (e0 + e1), w1 = e1 / (e0 + e1);
  Vec2 att1{w0 * v0[0] + w1 * v1[0], w0 * v0[1] + w1 * v1[1]};

  Vec2 o0 = matvec(att0, blk.wo->value.data, blk.bo->value.data);
  Vec2 o1 = matvec(att1, blk.wo->value.data, blk.bo->value.data);
  Vec2 r0{x0[0] + o0[0], x0[1] + o0[1]};
  Vec2 r1{x1[0] + o1[0], x1[1] + o1[1]};

  Vec2 g2{0.95, 1.05}, b2v{0.0, 0.015};
  Vec2 f0 = layer_norm2(r0, g2, b2v);
  Vec2 f1 = layer_norm2(r1, g2, b2v);
  Vec2 h0 = matvec(f0, blk.w1->value.data, blk.b1->value.data);
  Vec2 h1 = matvec(f1, blk.w1->value.data, blk.b1->value.data);
  h0 = {gelu1(h0[0]), gelu1(h0[1])};
  h1 = {gelu1(h1[0]), gelu1(h1[1])};
  Vec2 ff0 = matvec(h0, blk.w2->value.data, blk.b2->value.data);
  Vec2 ff1 = matvec(h1, blk.w2->value.data, blk.b2->value.data);
  Vec2 z0{r0[0] + ff0[0], r0[1] + ff0[1]};
  Vec2 z1{r1[0] + ff1[0], r1[1] + ff1[1]};

  const auto& ow = m.params.out_w->value.data;  // [2][3]
  const auto& ob = m.params.out_b->value.data;
  std::array<double, 3> logit0{z0[0] * ow[0] + z0[1] * ow[3] + ob[0],
                               z0[0] * ow[1] + z0[1] * ow[4] + ob[1],
                               z0[0] * ow[2] + z0[1] * ow[5] + ob[2]};
  std::array<double, 3> logit1{z1[0] * ow[0] + z1[1] * ow[3] + ob[0],
                               z1[0] * ow[1] + z1[1] * ow[4] + ob[1],
                               z1[0] * ow[2] + z1[1] * ow[5] + ob[2]};
  auto log_softmax3 = [](std::array<double, 3> l) {
    const double mx = std::max({l[0], l[1], l[2]});
    const double z = std::exp(l[0] - mx) + std::exp(l[1] - mx) + std::exp(l[2] - mx);
    const double lz = mx + std::log(z);
    return std::array<double, 3>{l[0] - lz, l[1] - lz, l[2] - lz};
  };
  const auto lp0 = log_softmax3(logit0);
  const auto lp1 = log_softmax3(logit1);

  for (std::size_t j = 0; j < 3; ++j) {
    CHECK(std::abs(got.at(0, j) - lp0[j]) < 1e-9);
    CHECK(std::abs(got.at(1, j) - lp1[j]) < 1e-9);
  }
}

TEST_CASE("batched inference matches the graph forward") {
  const ModelConfig cfg = mtlm_test::tiny_config(12, 2, 16, 2, 32, 24);
  Rng rng(31);
  Model m = init_model(cfg, rng);

  Rng seq_rng(32);
  std::vector<std::vector<int>> ids;
  std::vector<AttentionMask> masks;
  for (std::size_t n : {4u, 9u, 6u}) {
    ids.push_back(mtlm_test::random_sequence(n, cfg.vocab_size, seq_rng).ids);
    masks.push_back(causal_mask(n));
  }
  // one bidirectional variant in the same batch
  MaskPlan plan;
  plan.n = 7;
  plan.task = MaskTask::kBmlm;
  plan.targets = {3};
  plan.masked = {3};
  ids.push_back(mtlm_test::random_sequence(7, cfg.vocab_size, seq_rng).ids);
  masks.push_back(bmlm_mask(plan));

  const std::vector<Tensor> batched = forward_batch(m, ids, masks);
  for (std::size_t b = 0; b < ids.size(); ++b) {
    const Tensor single = forward(m, ids[b], masks[b])->value;
    REQUIRE(batched[b].shape == single.shape);
    for (std::size_t i = 0; i < single.numel(); ++i) {
      CHECK(std::abs(batched[b].data[i] - single.data[i]) < 1e-12);
    }
  }
}

TEST_CASE("post-norm wiring also satisfies shape and causality") {
  ModelConfig cfg = mtlm_test::tiny_config(9, 1, 8, 2, 16, 16);
  cfg.pre_norm = false;
  Rng rng(5);
  Model m = init_model(cfg, rng);
  Rng seq_rng(6);
  const EncodedSequence seq = mtlm_test::random_sequence(6, cfg.vocab_size, seq_rng);
  const AttentionMask mask = ulm_mask(seq.length());
  const Tensor base = forward(m, seq.ids, mask)->value;
  CHECK(base.rows() == 6);

  std::vector<int> perturbed = seq.ids;
  perturbed[4] = perturbed[4] == 5 ? 6 : 5;
  const Tensor got = forward(m, perturbed, mask)->value;
  for (std::size_t row = 0; row < 4; ++row) {
    for (std::size_t col = 0; col < cfg.vocab_size; ++col) {
      CHECK(got.at(row, col) == base.at(row, col));
    }
  }
}

TEST_CASE("checkpoint round trip is byte-identical") {
  const ModelConfig cfg = mtlm_test::tiny_config(9, 1, 8, 2, 16, 16);
  Rng rng(77);
  Model m = init_model(cfg, rng);
  AdamState adam = AdamState::init_like(m.params.snapshot_values());
  // make the moments non-trivial
  for (Tensor& t : adam.m) {
    for (double& d : t.data) d = rng.uniform(-1.0, 1.0);
  }
  adam.step = 17;

  const Checkpoint ck = Checkpoint::capture(m, adam, 0xabcdef1234ull);
  namespace fs = std::filesystem;
  const fs::path p1 = fs::temp_directory_path() / "mtlm_ck_test1.bin";
  const fs::path p2 = fs::temp_directory_path() / "mtlm_ck_test2.bin";
  save_checkpoint(p1.string(), ck);
  const Checkpoint loaded = load_checkpoint(p1.string());
  save_checkpoint(p2.string(), loaded);

  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  const std::string bytes1((std::istreambuf_iterator<char>(f1)),
                           std::istreambuf_iterator<char>());
  const std::string bytes2((std::istreambuf_iterator<char>(f2)),
                           std::istreambuf_iterator<char>());
  CHECK(bytes1 == bytes2);
  CHECK(!bytes1.empty());

  CHECK(loaded.step == 17);
  CHECK(loaded.vocab_fingerprint == 0xabcdef1234ull);
  CHECK(loaded.adam.m[0].data == adam.m[0].data);

  Model restored = loaded.restore_model();
  const auto got = restored.params.named();
  const auto want = m.params.named();
  for (std::size_t i = 0; i < want.size(); ++i) {
    CHECK(got[i].second->value.data == want[i].second->value.data);
  }
  fs::remove(p1);
  fs::remove(p2);
}
