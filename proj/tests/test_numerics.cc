// tests/test_numerics.cc

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

#include <cmath>

#include "mtlm/errors.h"
#include "mtlm/masks.h"
#include "mtlm/nn.h"
#include "mtlm/optim.h"
#include "mtlm/tensor.h"
#include "mtlm/training.h"
#include "test_util.h"

using namespace mtlm;
using mtlm_test::central_difference;
using mtlm_test::rel_err;

TEST_CASE("softmax_rows basics") {
  Tensor t = Tensor::matrix(1, 2);
  t.data = {0.0, 0.0};
  Tensor s = softmax_rows(t);
  CHECK(s.data[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(s.data[1] == doctest::Approx(0.5).epsilon(1e-12));

  Tensor big = Tensor::matrix(1, 3);
  big.data = {1000.0, 1000.0, 1000.0};
  Tensor sb = softmax_rows(big);
  for (double v : sb.data) {
    CHECK(std::isfinite(v));
    CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  }

  Tensor x = Tensor::matrix(1, 3);
  x.data = {1.0, 2.0, 3.0};
  Tensor sx = softmax_rows(x);
  // e^x / sum e^x evaluated with 50-digit arithmetic
  CHECK(std::abs(sx.data[0] - 0.0900305731704) < 1e-5);
  CHECK(std::abs(sx.data[1] - 0.2447284710548) < 1e-5);
  CHECK(std::abs(sx.data[2] - 0.6652409557748) < 1e-5);
}

TEST_CASE("softmax_rows rows sum to one and reject non-finite input") {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng.uniform_int(6), v = 2 + rng.uniform_int(9);
    Tensor t = Tensor::matrix(n, v);
    for (double& d : t.data) d = rng.uniform(-30.0, 30.0);
    Tensor s = softmax_rows(t);
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (std::size_t j = 0; j < v; ++j) {
        CHECK(s.at(i, j) >= 0.0);
        sum += s.at(i, j);
      }
      CHECK(std::abs(sum - 1.0) < 1e-9);
    }
  }
  Tensor bad = Tensor::matrix(1, 2);
  bad.data = {1.0, std::numeric_limits<double>::infinity()};
  CHECK_THROWS_AS(softmax_rows(bad), DataError);
}

TEST_CASE("masked_cross_entropy") {
  // uniform model over V=4, 3 read positions -> 3 log 4
  Tensor lp = Tensor::matrix(4, 4, std::log(0.25));
  std::vector<int> targets{1, 2, 3, 0};
  const double loss = masked_cross_entropy(lp, targets, {0, 1, 2});
  CHECK(std::abs(loss - 3.0 * std::log(4.0)) < 1e-12);
  CHECK(std::abs(loss - 4.1588830833596715) < 1e-12);

  CHECK(masked_cross_entropy(lp, targets, {}) == 0.0);

  // hand-built 2x3 table, reads both rows
  Tensor hand = Tensor::matrix(2, 3);
  hand.data = {std::log(0.2), std::log(0.3), std::log(0.5),
               std::log(0.1), std::log(0.6), std::log(0.3)};
  std::vector<int> t2{2, 1};
  const double manual = -(std::log(0.5) + std::log(0.6));
  CHECK(std::abs(masked_cross_entropy(hand, t2, {0, 1}) - manual) < 1e-12);

  CHECK_THROWS_AS(masked_cross_entropy(hand, t2, {5}), ContractViolation);
}

TEST_CASE("backward: sum of a parameter gives all-ones gradient") {
  nn::VarPtr p = nn::parameter(Tensor({3, 2}, 1.5));
  nn::VarPtr loss = nn::sum_all(p);
  nn::backward(loss);
  for (double g : p->grad.data) CHECK(g == 1.0);
}

TEST_CASE("backward: constant loss leaves gradients zero") {
  nn::VarPtr p = nn::parameter(Tensor({2, 2}, 1.0));
  nn::VarPtr c = nn::constant(Tensor::scalar(3.0));
  nn::backward(c);  // p is not on the path
  for (double g : p->grad.data) CHECK(g == 0.0);
  CHECK_THROWS_AS(nn::backward(nn::parameter(Tensor({2, 2}, 0.0))),
                  ContractViolation);
}

namespace {

// Finite-difference check for a loss functional over one parameter tensor.
void fd_check(nn::VarPtr param, const std::function<nn::VarPtr()>& build,
              std::size_t samples, Rng& rng, double tol = 1e-4) {
  nn::VarPtr loss = build();
  param->zero_grad();
  nn::backward(loss);
  Tensor analytic = param->grad;
  auto value = [&build] { return build()->scalar(); };
  for (std::size_t s = 0; s < samples; ++s) {
    const std::size_t idx = rng.uniform_int(param->value.numel());
    const double numeric = central_difference(param->value, idx, value);
    if (std::abs(analytic.data[idx]) < 1e-8 && std::abs(numeric) < 1e-8) continue;
    CHECK(rel_err(analytic.data[idx], numeric) < tol);
  }
}

}  // namespace

TEST_CASE("backward: per-op finite-difference checks") {
  Rng rng(11);
  auto rand_param = [&rng](std::vector<std::size_t> shape) {
    Tensor t(std::move(shape));
    for (double& d : t.data) d = rng.uniform(-1.0, 1.0);
    return nn::parameter(t);
  };

  SUBCASE("matmul, all transpose flags") {
    for (bool ta : {false, true}) {
      for (bool tb : {false, true}) {
        nn::VarPtr a = rand_param(ta ? std::vector<std::size_t>{4, 3}
                                     : std::vector<std::size_t>{3, 4});
        nn::VarPtr b = rand_param(tb ? std::vector<std::size_t>{5, 4}
                                     : std::vector<std::size_t>{4, 5});
        auto build = [&] { return nn::sum_all(nn::gelu(nn::matmul(a, b, ta, tb))); };
        fd_check(a, build, 8, rng);
        fd_check(b, build, 8, rng);
      }
    }
  }

  SUBCASE("layer_norm") {
    nn::VarPtr x = rand_param({3, 6});
    nn::VarPtr g = rand_param({6});
    nn::VarPtr b = rand_param({6});
    auto build = [&] { return nn::sum_all(nn::gelu(nn::layer_norm(x, g, b))); };
    fd_check(x, build, 12, rng);
    fd_check(g, build, 6, rng);
    fd_check(b, build, 6, rng);
  }

  SUBCASE("attention with a blocked mask") {
    nn::VarPtr q = rand_param({4, 6});
    nn::VarPtr k = rand_param({4, 6});
    nn::VarPtr v = rand_param({4, 6});
    MaskPlan plan;
    plan.n = 4;
    plan.task = MaskTask::kBmlm;
    plan.targets = {2};
    plan.masked = {2};
    const AttentionMask mask = bmlm_mask(plan);
    auto build = [&] {
      return nn::sum_all(nn::gelu(nn::attention(q, k, v, mask, 2)));
    };
    fd_check(q, build, 10, rng);
    fd_check(k, build, 10, rng);
    fd_check(v, build, 10, rng);
  }

  SUBCASE("log_softmax + nll + embedding") {
    nn::VarPtr table = rand_param({7, 5});
    const std::vector<int> ids{1, 4, 6, 2};
    const std::vector<int> targets{4, 3, 2, 0};
    auto build = [&] {
      nn::VarPtr e = nn::embedding(table, ids);
      return nn::nll(nn::log_softmax_rows(e), targets, {0, 1, 2});
    };
    fd_check(table, build, 14, rng);
  }

  SUBCASE("add, add_row_bias, scale, mul, relu") {
    nn::VarPtr a = rand_param({3, 4});
    nn::VarPtr b = rand_param({3, 4});
    nn::VarPtr bias = rand_param({4});
    auto build = [&] {
      nn::VarPtr y = nn::add_row_bias(nn::add(a, nn::scale(b, 0.7)), bias);
      return nn::sum_all(nn::mul(nn::relu(y), y));
    };
    fd_check(a, build, 8, rng);
    fd_check(b, build, 8, rng);
    fd_check(bias, build, 4, rng);
  }
}

TEST_CASE("backward: random two-layer model vs central finite differences") {
  const ModelConfig cfg = mtlm_test::tiny_config(9, 2, 8, 2, 16, 16);
  Rng init_rng(5);
  Model model = init_model(cfg, init_rng);
  // Widen the random weights so every gradient sits above the h = 1e-5
  // central-difference noise floor (~1e-10 absolute for this loss scale).
  for (auto& [name, var] : model.params.named()) {
    if (name.find("ln") != std::string::npos) continue;
    for (double& d : var->value.data) d *= 5.0;
  }
  Rng seq_rng(6);
  EncodedSequence seq = mtlm_test::random_sequence(7, cfg.vocab_size, seq_rng);

  auto build = [&] { return ulm_loss(model, seq); };
  model.params.zero_grads();
  nn::backward(build());

  // 95% of sampled coordinates must agree within 1e-4, skipping those where
  // both sides sit below 1e-8 (there the finite difference is pure noise).
  Rng pick(9);
  const auto named = model.params.named();
  int checked = 0, passed = 0;
  for (int s = 0; s < 40; ++s) {
    const auto& [name, var] = named[pick.uniform_int(named.size())];
    const std::size_t idx = pick.uniform_int(var->value.numel());
    const double analytic = var->grad.data[idx];
    const double numeric = central_difference(
        var->value, idx, [&] { return build()->scalar(); });
    if (std::abs(analytic) < 1e-8 && std::abs(numeric) < 1e-8) continue;
    ++checked;
    if (rel_err(analytic, numeric) < 1e-4) ++passed;
  }
  CHECK(checked > 10);
  CHECK(passed >= (checked * 95 + 99) / 100);
}

TEST_CASE("adam_step") {
  SUBCASE("zero gradient is a fixed point") {
    Tensor p({3}, 2.0);
    std::vector<Tensor*> params{&p};
    AdamState st = AdamState::init_like({p});
    adam_step(params, {Tensor({3}, 0.0)}, st, 0.1);
    CHECK(st.step == 1);
    for (double v : p.data) CHECK(v == 2.0);
  }

  SUBCASE("hand-evaluated scalar updates") {
    Tensor p({1}, 0.0);
    std::vector<Tensor*> params{&p};
    AdamState st = AdamState::init_like({p});
    adam_step(params, {Tensor({1}, 1.0)}, st, 0.1);
    // step 1: m-hat = 1, v-hat = 1 -> delta = -0.1 / (1 + 1e-8)
    const double expect1 = -0.1 / (1.0 + 1e-8);
    CHECK(std::abs(p.data[0] - expect1) < 1e-15);
    adam_step(params, {Tensor({1}, 1.0)}, st, 0.1);
    // constant gradient: bias correction keeps each update identical
    CHECK(std::abs(p.data[0] - 2.0 * expect1) < 1e-15);
    CHECK(st.step == 2);
  }

  SUBCASE("closed-form moments after two constant-gradient steps") {
    const double b1 = 0.9, b2 = 0.999, g = 0.37;
    Tensor p({1}, 1.0);
    std::vector<Tensor*> params{&p};
    AdamState st = AdamState::init_like({p});
    adam_step(params, {Tensor({1}, g)}, st, 0.01);
    adam_step(params, {Tensor({1}, g)}, st, 0.01);
    const double m2 = (1 - b1) * g * (1 + b1);
    const double v2 = (1 - b2) * g * g * (1 + b2);
    CHECK(std::abs(st.m[0].data[0] - m2) < 1e-15);
    CHECK(std::abs(st.v[0].data[0] - v2) < 1e-15);
  }

  SUBCASE("shape mismatch is rejected") {
    Tensor p({2}, 0.0);
    std::vector<Tensor*> params{&p};
    AdamState st = AdamState::init_like({p});
    CHECK_THROWS_AS(adam_step(params, {Tensor({3}, 0.0)}, st, 0.1),
                    ContractViolation);
  }
}

TEST_CASE("lr_at warmup and decay") {
  LrSchedule s;
  s.warmup_steps = 5000;
  s.peak_lr = 2e-4;
  s.min_lr = 1e-6;
  s.total_steps = 50000;

  CHECK(lr_at(s, 0) == 0.0);
  CHECK(lr_at(s, 5000) == 2e-4);
  CHECK(lr_at(s, 50000) == 1e-6);
  CHECK(lr_at(s, 123456) == 1e-6);

  // continuity at the warmup/decay boundary
  const double left = lr_at(s, 5000);
  const double right_slope = (s.min_lr - s.peak_lr) / 45000.0;
  CHECK(std::abs(lr_at(s, 5001) - (left + right_slope)) < 1e-12);

  // monotone decay between the knees
  double prev = lr_at(s, 5000);
  for (std::uint64_t step = 5001; step < 50000; step += 997) {
    const double cur = lr_at(s, step);
    CHECK(cur < prev);
    CHECK(cur >= s.min_lr);
    prev = cur;
  }
}
