// src/training.cc

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

#include "mtlm/training.h"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "mtlm/errors.h"
#include "mtlm/log.h"

namespace mtlm {

void TrainConfig::validate() const {
  MTLM_CHECK(mask_rate > 0.0 && mask_rate < 1.0, "TrainConfig: mask_rate in (0,1)");
  MTLM_CHECK(batch_size >= 1, "TrainConfig: batch_size >= 1");
  MTLM_CHECK(log_interval >= 1, "TrainConfig: log_interval >= 1");
  for (double w : task_weights) {
    MTLM_CHECK(w >= 0.0, "TrainConfig: task weights must be non-negative");
  }
  MTLM_CHECK(task_weights[0] + task_weights[1] + task_weights[2] > 0.0,
             "TrainConfig: at least one task weight must be positive");
}

namespace {

// targets[i] = token at position i+1; only rows < n-1 are ever read.
std::vector<int> shifted_targets(const std::vector<int>& ids) {
  std::vector<int> t(ids.size(), -1);
  for (std::size_t i = 0; i + 1 < ids.size(); ++i) t[i] = ids[i + 1];
  return t;
}

AttentionMask mask_for(const MaskPlan& plan) {
  switch (plan.task) {
    case MaskTask::kUlm:
      return ulm_mask(plan.n);
    case MaskTask::kUmlm:
      return umlm_mask(plan);
    case MaskTask::kBmlm:
      return bmlm_mask(plan);
  }
  throw ContractViolation("mask_for: unknown task");
}

}  // namespace

nn::VarPtr task_log_probs(const Model& model, const std::vector<int>& ids,
                          const MaskPlan& plan, Rng* dropout_rng) {
  MTLM_CHECK(plan.n == ids.size(), "task_log_probs: plan length mismatch");
  const AttentionMask mask = mask_for(plan);
  const bool replace = model.config.mask_inputs && plan.task != MaskTask::kUlm;
  const std::vector<int> input =
      replace ? apply_mask_tokens(ids, plan, Vocab::kMask) : ids;
  return forward(model, input, mask, dropout_rng);
}

nn::VarPtr ulm_loss(const Model& model, const EncodedSequence& seq,
                    Rng* dropout_rng) {
  const std::size_t n = seq.length();
  MTLM_CHECK(n >= 2, "ulm_loss: sequence too short");
  MaskPlan plan;
  plan.n = n;
  plan.task = MaskTask::kUlm;
  for (std::size_t t = 1; t < n; ++t) plan.targets.push_back(t);
  nn::VarPtr lp = task_log_probs(model, seq.ids, plan, dropout_rng);
  return nn::nll(lp, shifted_targets(seq.ids), read_rows_of(plan.targets));
}

nn::VarPtr bmlm_loss(const Model& model, const EncodedSequence& seq,
                     const MaskPlan& plan, Rng* dropout_rng) {
  MTLM_CHECK(plan.task == MaskTask::kBmlm, "bmlm_loss: plan task mismatch");
  MTLM_CHECK(plan.n == seq.length(), "bmlm_loss: plan length mismatch");
  plan.validate();
  nn::VarPtr lp = task_log_probs(model, seq.ids, plan, dropout_rng);
  return nn::nll(lp, shifted_targets(seq.ids), read_rows_of(plan.targets));
}

nn::VarPtr umlm_loss(const Model& model, const EncodedSequence& seq,
                     const MaskPlan& plan, Rng* dropout_rng) {
  MTLM_CHECK(plan.task == MaskTask::kUmlm, "umlm_loss: plan task mismatch");
  MTLM_CHECK(plan.n == seq.length(), "umlm_loss: plan length mismatch");
  plan.validate();
  nn::VarPtr lp = task_log_probs(model, seq.ids, plan, dropout_rng);
  return nn::nll(lp, shifted_targets(seq.ids), read_rows_of(plan.targets));
}

StepLosses mtlm_step(Model& model, AdamState& adam,
                     const std::vector<EncodedSequence>& batch,
                     const TrainConfig& config, Rng& plan_rng, Rng* dropout_rng) {
  MTLM_CHECK(!batch.empty(), "mtlm_step: empty batch");
  config.validate();
  const double w_ulm = config.task_weights[0];
  const double w_umlm = config.task_weights[1];
  const double w_bmlm = config.task_weights[2];

  nn::VarPtr ulm_sum, umlm_sum, bmlm_sum;
  auto accumulate = [](nn::VarPtr& acc, const nn::VarPtr& term) {
    acc = acc ? nn::add(acc, term) : term;
  };
  for (const EncodedSequence& seq : batch) {
    if (w_ulm > 0.0) accumulate(ulm_sum, ulm_loss(model, seq, dropout_rng));
    if (w_umlm > 0.0) {
      MaskPlan plan = sample_umlm_plan(seq.length(), config.mask_rate, plan_rng);
      accumulate(umlm_sum, umlm_loss(model, seq, plan, dropout_rng));
    }
    if (w_bmlm > 0.0) {
      MaskPlan plan = sample_bmlm_plan(seq.length(), config.mask_rate, plan_rng);
      accumulate(bmlm_sum, bmlm_loss(model, seq, plan, dropout_rng));
    }
  }

  const double inv_b = 1.0 / static_cast<double>(batch.size());
  StepLosses losses;
  nn::VarPtr total;
  auto fold = [&total](const nn::VarPtr& term) {
    total = total ? nn::add(total, term) : term;
  };
  if (ulm_sum) {
    nn::VarPtr mean = nn::scale(ulm_sum, inv_b);
    losses.ulm = mean->scalar();
    fold(nn::scale(mean, w_ulm));
  }
  if (umlm_sum) {
    nn::VarPtr mean = nn::scale(umlm_sum, inv_b);
    losses.umlm = mean->scalar();
    fold(nn::scale(mean, w_umlm));
  }
  if (bmlm_sum) {
    nn::VarPtr mean = nn::scale(bmlm_sum, inv_b);
    losses.bmlm = mean->scalar();
    fold(nn::scale(mean, w_bmlm));
  }
  losses.total = total->scalar();

  model.params.zero_grads();
  nn::backward(total);
  if (!model.config.learned_positions) {
    model.params.pos_emb->zero_grad();  // sinusoidal positions stay fixed
  }
  Gradients grads = model.params.snapshot_grads();
  if (config.grad_clip > 0.0) {
    double sq = 0.0;
    for (const Tensor& g : grads) {
      for (double d : g.data) sq += d * d;
    }
    const double norm = std::sqrt(sq);
    if (norm > config.grad_clip) {
      const double s = config.grad_clip / norm;
      for (Tensor& g : grads) {
        for (double& d : g.data) d *= s;
      }
    }
  }
  std::vector<Tensor*> values = model.params.values();
  adam_step(values, grads, adam, lr_at(config.schedule, adam.step + 1),
            config.weight_decay);
  return losses;
}

TrainResult train(const std::vector<std::string>& corpus_lines, const Vocab& vocab,
                  const ModelConfig& model_config, const TrainConfig& train_config,
                  const std::function<void(const Checkpoint&)>& on_checkpoint) {
  model_config.validate();
  train_config.validate();

  TrainResult result;
  std::vector<EncodedSequence> data;
  for (const std::string& line : corpus_lines) {
    EncodedSequence seq = encode(vocab, line);
    if (seq.length() > model_config.max_len) {
      ++result.skipped_too_long;
      continue;
    }
    if (seq.length() < 3) {
      ++result.skipped_too_short;
      continue;
    }
    data.push_back(std::move(seq));
  }
  if (result.skipped_too_long > 0) {
    MTLM_INFO("skipped %zu sentences longer than max_len", result.skipped_too_long);
  }
  if (result.skipped_too_short > 0) {
    MTLM_INFO("skipped %zu sentences shorter than 3 tokens", result.skipped_too_short);
  }
  if (data.empty()) throw DataError("train: no usable sentences in corpus");

  Rng init_rng(train_config.seed + seed_offset::kModelInit);
  Rng shuffle_rng(train_config.seed + seed_offset::kShuffle);
  Rng plan_rng(train_config.seed + seed_offset::kMaskPlans);
  Rng dropout_rng(train_config.seed + seed_offset::kDropout);
  Rng* drop = model_config.dropout > 0.0 ? &dropout_rng : nullptr;

  Model model = init_model(model_config, init_rng);
  AdamState adam = AdamState::init_like(model.params.snapshot_values());

  std::vector<std::size_t> order(data.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::size_t cursor = order.size();  // force an initial shuffle

  for (std::uint64_t step = 1; step <= train_config.total_steps; ++step) {
    std::vector<EncodedSequence> batch;
    batch.reserve(train_config.batch_size);
    while (batch.size() < train_config.batch_size) {
      if (cursor >= order.size()) {
        shuffle_rng.shuffle(order);
        cursor = 0;
      }
      batch.push_back(data[order[cursor++]]);
    }
    StepLosses losses = mtlm_step(model, adam, batch, train_config, plan_rng, drop);
    if (step % train_config.log_interval == 0) {
      LossLogEntry e;
      e.step = step;
      e.lr = lr_at(train_config.schedule, step);
      e.ulm = losses.ulm;
      e.umlm = losses.umlm;
      e.bmlm = losses.bmlm;
      result.log.push_back(e);
      MTLM_DEBUG("step %llu lr %.3g ulm %.4f umlm %.4f bmlm %.4f",
                 static_cast<unsigned long long>(step), e.lr, e.ulm, e.umlm, e.bmlm);
    }
    if (on_checkpoint && train_config.checkpoint_interval > 0 &&
        step % train_config.checkpoint_interval == 0 &&
        step != train_config.total_steps) {
      on_checkpoint(Checkpoint::capture(model, adam, vocab.fingerprint()));
    }
  }

  result.final_checkpoint = Checkpoint::capture(model, adam, vocab.fingerprint());
  return result;
}

void write_loss_log(const std::string& path, const std::vector<LossLogEntry>& log) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("loss log: cannot open " + path);
  char buf[256];
  for (const LossLogEntry& e : log) {
    std::snprintf(buf, sizeof(buf), "%llu\t%.17g\t%.17g\t%.17g\t%.17g\n",
                  static_cast<unsigned long long>(e.step), e.lr, e.ulm, e.umlm,
                  e.bmlm);
    out << buf;
  }
}

}  // namespace mtlm
