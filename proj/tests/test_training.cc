// tests/test_training.cc

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

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mtlm/errors.h"
#include "mtlm/grammar.h"
#include "mtlm/training.h"
#include "test_util.h"

using namespace mtlm;

namespace {

TrainConfig quick_train_config(std::uint64_t steps, std::uint64_t seed = 1) {
  TrainConfig tc;
  tc.total_steps = steps;
  tc.seed = seed;
  tc.batch_size = 4;
  tc.log_interval = 10;
  tc.schedule.warmup_steps = 20;
  tc.schedule.peak_lr = 3e-3;
  tc.schedule.min_lr = 1e-4;
  tc.schedule.total_steps = steps == 0 ? 1 : steps;
  return tc;
}

}  // namespace

TEST_CASE("uniform-output model losses equal reads * log V") {
  const ModelConfig cfg = mtlm_test::tiny_config(8, 1, 8, 2, 16, 16);
  Model m = mtlm_test::uniform_model(cfg);
  const double logv = std::log(8.0);

  EncodedSequence seq;
  seq.ids = {Vocab::kSos, 5, 6, Vocab::kEos};  // n = 4
  CHECK(std::abs(ulm_loss(m, seq)->scalar() - 3.0 * logv) < 1e-12);

  MaskPlan bp;
  bp.n = 4;
  bp.task = MaskTask::kBmlm;
  bp.targets = {1, 2};
  bp.masked = {1, 2};
  CHECK(std::abs(bmlm_loss(m, seq, bp)->scalar() - 2.0 * logv) < 1e-12);

  MaskPlan up;
  up.n = 4;
  up.task = MaskTask::kUmlm;
  up.targets = {2};
  up.masked = {1};
  CHECK(std::abs(umlm_loss(m, seq, up)->scalar() - 1.0 * logv) < 1e-12);
}

TEST_CASE("ulm_loss equals the sequential-prefix sum") {
  const ModelConfig cfg = mtlm_test::tiny_config(10, 2, 16, 2, 32, 24);
  Rng rng(3);
  Model m = init_model(cfg, rng);
  Rng seq_rng(4);
  const EncodedSequence seq = mtlm_test::random_sequence(8, cfg.vocab_size, seq_rng);
  const std::size_t n = seq.length();

  double prefix_sum = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    std::vector<int> prefix(seq.ids.begin(), seq.ids.begin() + i);
    const Tensor lp = forward(m, prefix, causal_mask(i))->value;
    prefix_sum -= lp.at(i - 1, static_cast<std::size_t>(seq.ids[i]));
  }
  CHECK(std::abs(ulm_loss(m, seq)->scalar() - prefix_sum) < 1e-9);
}

TEST_CASE("bmlm_loss ignores the stored tokens at masked positions") {
  const ModelConfig cfg = mtlm_test::tiny_config(11, 2, 16, 2, 32, 24);
  Rng rng(5);
  Model m = init_model(cfg, rng);
  EncodedSequence seq;
  seq.ids = {Vocab::kSos, 6, 7, 8, 9, 6, Vocab::kEos};

  MaskPlan plan;
  plan.n = seq.length();
  plan.task = MaskTask::kBmlm;
  plan.targets = {2, 3};
  plan.masked = {2, 3};

  // Perturb inputs at masked positions; score against the original targets.
  const Tensor base = task_log_probs(m, seq.ids, plan)->value;
  std::vector<int> perturbed = seq.ids;
  perturbed[2] = 10;
  perturbed[3] = 5;
  const Tensor got = task_log_probs(m, perturbed, plan)->value;
  CHECK(base.data == got.data);  // bitwise: no path from masked inputs

  const auto rows = read_rows_of(plan.targets);
  std::vector<int> targets(seq.length(), -1);
  for (std::size_t i = 0; i + 1 < seq.length(); ++i) targets[i] = seq.ids[i + 1];
  CHECK(masked_cross_entropy(base, targets, rows) ==
        masked_cross_entropy(got, targets, rows));
}

TEST_CASE("umlm_loss with an empty masked set matches the causal terms") {
  const ModelConfig cfg = mtlm_test::tiny_config(10, 2, 16, 2, 32, 24);
  Rng rng(6);
  Model m = init_model(cfg, rng);
  Rng seq_rng(7);
  const EncodedSequence seq = mtlm_test::random_sequence(9, cfg.vocab_size, seq_rng);

  MaskPlan degenerate;
  degenerate.n = seq.length();
  degenerate.task = MaskTask::kUmlm;
  degenerate.targets = {2, 4, 7};

  const Tensor causal_lp = task_log_probs(
      m, seq.ids,
      [&] {
        MaskPlan p;
        p.n = seq.length();
        p.task = MaskTask::kUlm;
        for (std::size_t t = 1; t < seq.length(); ++t) p.targets.push_back(t);
        return p;
      }())->value;
  std::vector<int> targets(seq.length(), -1);
  for (std::size_t i = 0; i + 1 < seq.length(); ++i) targets[i] = seq.ids[i + 1];
  const double expected =
      masked_cross_entropy(causal_lp, targets, read_rows_of(degenerate.targets));

  CHECK(std::abs(umlm_loss(m, seq, degenerate)->scalar() - expected) < 1e-12);
}

TEST_CASE("mtlm_step with weights (1,0,0) is pure causal training") {
  const ModelConfig cfg = mtlm_test::tiny_config(10, 1, 8, 2, 16, 24);
  Rng rng(8);
  Model m = init_model(cfg, rng);
  AdamState adam = AdamState::init_like(m.params.snapshot_values());

  Rng seq_rng(9);
  std::vector<EncodedSequence> batch;
  for (int i = 0; i < 3; ++i) {
    batch.push_back(mtlm_test::random_sequence(6, cfg.vocab_size, seq_rng));
  }
  TrainConfig tc = quick_train_config(1);
  tc.task_weights = {1.0, 0.0, 0.0};

  Rng plan_rng(100), plan_twin(100);
  const StepLosses losses = mtlm_step(m, adam, batch, tc, plan_rng);
  CHECK(losses.umlm == 0.0);
  CHECK(losses.bmlm == 0.0);
  CHECK(losses.total == losses.ulm);
  CHECK(losses.ulm > 0.0);
  // no plan randomness consumed for the disabled tasks
  CHECK(plan_rng.next_u64() == plan_twin.next_u64());
  CHECK(adam.step == 1);
}

TEST_CASE("gradient of the summed loss equals the sum of per-task gradients") {
  const ModelConfig cfg = mtlm_test::tiny_config(10, 2, 16, 2, 32, 24);
  Rng rng(10);
  Model m = init_model(cfg, rng);
  Rng seq_rng(11);
  const EncodedSequence seq = mtlm_test::random_sequence(7, cfg.vocab_size, seq_rng);

  Rng plan_rng(12);
  const MaskPlan up = sample_umlm_plan(seq.length(), 0.3, plan_rng);
  const MaskPlan bp = sample_bmlm_plan(seq.length(), 0.3, plan_rng);

  auto grad_of = [&](const std::function<nn::VarPtr()>& build) {
    m.params.zero_grads();
    nn::backward(build());
    return m.params.snapshot_grads();
  };
  const Gradients g_ulm = grad_of([&] { return ulm_loss(m, seq); });
  const Gradients g_umlm = grad_of([&] { return umlm_loss(m, seq, up); });
  const Gradients g_bmlm = grad_of([&] { return bmlm_loss(m, seq, bp); });
  const Gradients g_sum = grad_of([&] {
    return nn::add(nn::add(ulm_loss(m, seq), umlm_loss(m, seq, up)),
                   bmlm_loss(m, seq, bp));
  });

  for (std::size_t i = 0; i < g_sum.size(); ++i) {
    for (std::size_t j = 0; j < g_sum[i].numel(); ++j) {
      const double separate =
          g_ulm[i].data[j] + g_umlm[i].data[j] + g_bmlm[i].data[j];
      CHECK(std::abs(g_sum[i].data[j] - separate) < 1e-10);
    }
  }
}

TEST_CASE("total loss is exactly the weighted sub-loss sum") {
  const ModelConfig cfg = mtlm_test::tiny_config(9, 1, 8, 2, 16, 24);
  Rng rng(13);
  Model m = init_model(cfg, rng);
  AdamState adam = AdamState::init_like(m.params.snapshot_values());
  Rng seq_rng(14);
  std::vector<EncodedSequence> batch;
  for (int i = 0; i < 2; ++i) {
    batch.push_back(mtlm_test::random_sequence(7, cfg.vocab_size, seq_rng));
  }
  TrainConfig tc = quick_train_config(1);
  tc.task_weights = {1.0, 0.5, 2.0};
  Rng plan_rng(15);
  const StepLosses l = mtlm_step(m, adam, batch, tc, plan_rng);
  CHECK(std::abs(l.total - (1.0 * l.ulm + 0.5 * l.umlm + 2.0 * l.bmlm)) < 1e-12);
  CHECK(l.ulm >= 0.0);
  CHECK(l.umlm >= 0.0);
  CHECK(l.bmlm >= 0.0);
}

TEST_CASE("ten training steps are bitwise reproducible") {
  const auto sentences = generate_sentences(30, 5);
  std::string joined;
  for (const auto& s : sentences) joined += s + "\n";
  std::istringstream cs(joined);
  const Vocab vocab = Vocab::build(cs, TokenMode::kChar, 64);

  const ModelConfig cfg = mtlm_test::tiny_config(vocab.size(), 1, 8, 2, 16, 32);
  const TrainConfig tc = quick_train_config(10, 3);

  const TrainResult a = train(sentences, vocab, cfg, tc);
  const TrainResult b = train(sentences, vocab, cfg, tc);
  REQUIRE(a.final_checkpoint.params.size() == b.final_checkpoint.params.size());
  for (std::size_t i = 0; i < a.final_checkpoint.params.size(); ++i) {
    CHECK(a.final_checkpoint.params[i].data == b.final_checkpoint.params[i].data);
  }
  CHECK(a.final_checkpoint.step == 10);
}

TEST_CASE("zero steps returns the initialization") {
  const auto sentences = generate_sentences(10, 6);
  std::string joined;
  for (const auto& s : sentences) joined += s + "\n";
  std::istringstream cs(joined);
  const Vocab vocab = Vocab::build(cs, TokenMode::kChar, 64);
  const ModelConfig cfg = mtlm_test::tiny_config(vocab.size(), 1, 8, 2, 16, 32);
  TrainConfig tc = quick_train_config(0, 4);

  const TrainResult r = train(sentences, vocab, cfg, tc);
  Rng init_rng(tc.seed + seed_offset::kModelInit);
  const Model fresh = init_model(cfg, init_rng);
  const auto named = fresh.params.named();
  for (std::size_t i = 0; i < named.size(); ++i) {
    CHECK(r.final_checkpoint.params[i].data == named[i].second->value.data);
  }
  CHECK(r.log.empty());
}

TEST_CASE("memorizing a single sentence drives the loss down") {
  const std::vector<std::string> corpus{"da ba da"};
  std::istringstream cs("da ba da\n");
  const Vocab vocab = Vocab::build(cs, TokenMode::kChar, 64);
  const ModelConfig cfg = mtlm_test::tiny_config(vocab.size(), 1, 16, 2, 32, 32);
  TrainConfig tc = quick_train_config(200, 5);
  tc.batch_size = 1;
  tc.log_interval = 1;
  tc.task_weights = {1.0, 0.0, 0.0};  // deterministic objective for a clean trend

  const TrainResult r = train(corpus, vocab, cfg, tc);
  REQUIRE(r.log.size() == 200);
  const double first = r.log.front().ulm;
  const double last = r.log.back().ulm;
  CHECK(last < 0.3 * first);
}

TEST_CASE("training smoke on a generated corpus halves the loss") {
  const auto sentences = generate_sentences(120, 21);
  std::string joined;
  for (const auto& s : sentences) joined += s + "\n";
  std::istringstream cs(joined);
  const Vocab vocab = Vocab::build(cs, TokenMode::kChar, 64);
  const ModelConfig cfg = mtlm_test::tiny_config(vocab.size(), 2, 24, 2, 48, 40);
  TrainConfig tc = quick_train_config(300, 9);
  tc.batch_size = 8;
  tc.log_interval = 10;
  tc.schedule.warmup_steps = 30;
  tc.schedule.total_steps = 300;

  const TrainResult r = train(sentences, vocab, cfg, tc);
  REQUIRE(r.log.size() == 30);
  const LossLogEntry& early = r.log.front();  // step 10
  const LossLogEntry& final_entry = r.log.back();
  const double early_total = early.ulm + early.umlm + early.bmlm;
  const double final_total = final_entry.ulm + final_entry.umlm + final_entry.bmlm;
  CHECK(final_total < 0.5 * early_total);
}

TEST_CASE("loss log formatting") {
  std::vector<LossLogEntry> log{{10, 1e-3, 2.5, 1.25, 1.75}};
  namespace fs = std::filesystem;
  const auto path = fs::temp_directory_path() / "mtlm_losslog_test.tsv";
  write_loss_log(path.string(), log);
  std::ifstream in(path);
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line.rfind("10\t", 0) == 0);
  CHECK(std::count(line.begin(), line.end(), '\t') == 4);
  fs::remove(path);
}
