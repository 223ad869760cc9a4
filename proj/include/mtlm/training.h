// include/mtlm/training.h

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

#ifndef MTLM_TRAINING_H_
#define MTLM_TRAINING_H_

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mtlm/checkpoint.h"
#include "mtlm/masks.h"
#include "mtlm/model.h"
#include "mtlm/optim.h"
#include "mtlm/tokenizer.h"

namespace mtlm {

struct TrainConfig {
  double mask_rate = 0.3;
  std::size_t batch_size = 8;
  std::uint64_t total_steps = 1000;
  LrSchedule schedule;
  std::uint64_t seed = 1;
  // ULM / UMLM / BMLM weights.  (1,0,0) trains the unidirectional baseline.
  std::array<double, 3> task_weights{1.0, 1.0, 1.0};
  std::uint64_t log_interval = 10;
  std::uint64_t checkpoint_interval = 0;  // 0 = final checkpoint only
  double grad_clip = 0.0;                 // 0 = off
  double weight_decay = 0.0;              // 0 = off

  void validate() const;
};

// Per-sequence log-probs for one sub-task: builds the task's attention
// mask, feeds <mask> at masked positions when the model is configured to,
// and runs the graph forward.
nn::VarPtr task_log_probs(const Model& model, const std::vector<int>& ids,
                          const MaskPlan& plan, Rng* dropout_rng = nullptr);

// Left-to-right loss over reads {1..n-1}: sum of -log P(y_i | y_<i).
nn::VarPtr ulm_loss(const Model& model, const EncodedSequence& seq,
                    Rng* dropout_rng = nullptr);

// Masked-prediction losses; the plan's targets are scored at row t-1
// against the true (pre-masking) tokens.
nn::VarPtr bmlm_loss(const Model& model, const EncodedSequence& seq,
                     const MaskPlan& plan, Rng* dropout_rng = nullptr);
nn::VarPtr umlm_loss(const Model& model, const EncodedSequence& seq,
                     const MaskPlan& plan, Rng* dropout_rng = nullptr);

struct StepLosses {
  double ulm = 0.0;
  double umlm = 0.0;
  double bmlm = 0.0;
  double total = 0.0;
};

// One multi-task update: per sample one forward per active sub-task with a
// freshly sampled plan, a single summed loss, one backward, one Adam step
// at lr_at(step+1).  Returns batch-mean sub-losses.
StepLosses mtlm_step(Model& model, AdamState& adam,
                     const std::vector<EncodedSequence>& batch,
                     const TrainConfig& config, Rng& plan_rng,
                     Rng* dropout_rng = nullptr);

struct LossLogEntry {
  std::uint64_t step = 0;
  double lr = 0.0;
  double ulm = 0.0;
  double umlm = 0.0;
  double bmlm = 0.0;
};

struct TrainResult {
  Checkpoint final_checkpoint;
  std::vector<LossLogEntry> log;
  std::size_t skipped_too_long = 0;
  std::size_t skipped_too_short = 0;
};

// Full loop over shuffled batches of the encoded corpus.  Sentences longer
// than max_len or shorter than 3 tokens are skipped with a counted
// warning.  on_checkpoint, when set, receives the periodic snapshots.
TrainResult train(const std::vector<std::string>& corpus_lines, const Vocab& vocab,
                  const ModelConfig& model_config, const TrainConfig& train_config,
                  const std::function<void(const Checkpoint&)>& on_checkpoint = {});

void write_loss_log(const std::string& path, const std::vector<LossLogEntry>& log);

}  // namespace mtlm

#endif  // MTLM_TRAINING_H_
