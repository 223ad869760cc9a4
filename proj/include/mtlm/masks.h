// include/mtlm/masks.h

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

#ifndef MTLM_MASKS_H_
#define MTLM_MASKS_H_

#include <cstdint>
#include <cstddef>
#include <vector>

#include "mtlm/rng.h"

namespace mtlm {

// Positions are 0-based indices into the token sequence: position 0 is the
// start sentinel, position n-1 the end sentinel.  Positions 1..n-1 are
// targetable and maskable; position 0 may appear in a UMLM masked set only
// as context corruption.

enum class MaskTask { kUlm, kUmlm, kBmlm };

// One sub-task's sampled plan: the target positions whose tokens are
// predicted (read at row t-1) and the masked positions whose tokens are
// hidden from the model.
struct MaskPlan {
  std::size_t n = 0;
  MaskTask task = MaskTask::kUlm;
  std::vector<std::size_t> targets;  // ascending, the paper's Y_r
  std::vector<std::size_t> masked;   // ascending, the paper's Y_m

  // Positional sanity used by the loss functions: in-range, sorted,
  // distinct.  Deliberately weaker than the sampler guarantees so that
  // hand-built degenerate plans (e.g. UMLM with an empty masked set)
  // remain usable.
  void validate() const;

  // Full invariants as produced by the samplers; property-tested.
  bool sampled_invariants_hold() const;
};

// n x n additive attention bias: 0 where the query may attend the key,
// -infinity (realized as -1e9) where it may not.  Stored as a byte matrix;
// bias(q, k) exposes the additive view.
class AttentionMask {
 public:
  AttentionMask() = default;
  explicit AttentionMask(std::size_t n) : n_(n), allowed_(n * n, 1) {}

  static constexpr double kNegInf = -1e9;

  std::size_t n() const { return n_; }
  bool allowed(std::size_t q, std::size_t k) const { return allowed_[q * n_ + k] != 0; }
  void block(std::size_t q, std::size_t k) { allowed_[q * n_ + k] = 0; }
  double bias(std::size_t q, std::size_t k) const {
    return allowed(q, k) ? 0.0 : kNegInf;
  }
  std::size_t zero_entries_in_row(std::size_t q) const;
  bool operator==(const AttentionMask& o) const {
    return n_ == o.n_ && allowed_ == o.allowed_;
  }

 private:
  std::size_t n_ = 0;
  std::vector<std::uint8_t> allowed_;
};

// Row that carries the prediction for the token at `target`: target - 1.
// The shifted read convention is shared by all three sub-tasks.
std::size_t read_row(std::size_t target);

std::vector<std::size_t> read_rows_of(const std::vector<std::size_t>& targets);

// Causal (lower-triangular-allowed) mask for any n >= 1.  Internal helper;
// the public ULM operation below enforces the n >= 2 sequence contract.
AttentionMask causal_mask(std::size_t n);

// Left-to-right mask: (q, k) allowed iff k <= q.  n must be >= 2.
AttentionMask ulm_mask(std::size_t n);

// Bidirectional masked-LM mask: key column k blocked for every query iff
// k is masked.
AttentionMask bmlm_mask(const MaskPlan& plan);

// Unidirectional masked-LM mask: (q, k) allowed iff k <= q and either k is
// unmasked or k == q.  Keeping the diagonal open means no row is ever fully
// blocked, even when position 0 is masked.
AttentionMask umlm_mask(const MaskPlan& plan);

// Sample |Y_m| = max(1, round(rate * (n-1))) masked positions without
// replacement from {1..n-1}; targets = masked.  n must be >= 3.
MaskPlan sample_bmlm_plan(std::size_t n, double rate, Rng& rng);

// Sample targets like BMLM, then for each target (ascending) draw one
// distinct masked position from its left context {0..t-1}.  Targets whose
// left context is exhausted are dropped, keeping |Y_r| == |Y_m|.
MaskPlan sample_umlm_plan(std::size_t n, double rate, Rng& rng);

// Input ids with the token at every masked position replaced by
// `mask_token_id`.  Combined with column blocking this removes every path
// from a masked token to any model output.
std::vector<int> apply_mask_tokens(const std::vector<int>& ids,
                                   const MaskPlan& plan, int mask_token_id);

}  // namespace mtlm

#endif  // MTLM_MASKS_H_
