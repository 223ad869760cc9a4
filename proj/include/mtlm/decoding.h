// include/mtlm/decoding.h

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

#ifndef MTLM_DECODING_H_
#define MTLM_DECODING_H_

#include <stdexcept>
#include <vector>

#include "mtlm/acoustic_sim.h"
#include "mtlm/model.h"
#include "mtlm/tensor.h"

namespace mtlm {

// Partial or complete decode path with the acoustic and LM running sums
// kept separate so any lambda can recombine them.
struct Hypothesis {
  std::vector<int> ids;  // starts with sos; ends with eos iff completed
  double am_score = 0.0;
  double lm_score = 0.0;
  bool completed = false;

  std::size_t body_length() const {
    return ids.size() - 1 - (completed ? 1 : 0);
  }
  double combined(double lambda) const { return am_score + lambda * lm_score; }
};

enum class GuideMode { kS2S, kMtlmS2S };

struct BeamConfig {
  std::size_t beam = 3;
  double lambda = 0.3;
  GuideMode guide_mode = GuideMode::kS2S;
  std::size_t length_window = 2;

  void validate() const;
};

enum class RescoreMode { kUnidirectional, kBidirectional };

// Per-token scores used only to pick each hypothesis's candidate expansion
// tokens: the acoustic row alone (S2S) or acoustic + lambda * LM
// (MTLM+S2S).  Hypothesis ranking always uses the combined running scores.
Tensor guide_score(const Tensor& am_dist, const Tensor& lm_dist,
                   const BeamConfig& config);

// Raised when the beam exhausts without an admissible completion; carries
// the best incomplete path.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(const std::string& msg, Hypothesis best_incomplete)
      : std::runtime_error(msg), best_incomplete(std::move(best_incomplete)) {}
  Hypothesis best_incomplete;
};

struct DecodeResult {
  Hypothesis best;
  std::vector<Hypothesis> completed;  // admissible completions, best first
  std::size_t length_estimate = 0;
};

// One-pass beam search combining acoustic and LM scores per token.  A
// hypothesis may complete only if its body length lies within
// length_window of the channel's length estimate; incomplete paths beyond
// estimate + window are pruned.  The LM term is a causal next-token
// distribution from a fresh full-prefix forward at every step.
DecodeResult shallow_fusion_decode(const SyntheticAM& am, const Model& lm,
                                   const BeamConfig& config);

// Sum over positions 1..n-1 of log P(y_i | y_<i) from one causal forward.
double score_unidirectional(const Model& lm, const std::vector<int>& ids);

// Sum over positions 1..n-1 of log P(y_i | rest of sequence), each term
// from a single-position masked variant; the variants are evaluated as one
// batched forward.  Optional per-position terms and eos-term exclusion.
double score_bidirectional(const Model& lm, const std::vector<int>& ids,
                           std::vector<double>* terms = nullptr,
                           bool include_eos_term = true);

// Re-rank an n-best list: combined = am + lambda * Score_LM(mode), sorted
// descending, stable so acoustic order breaks ties.  lm/combined scores
// (and per-position terms in bidirectional mode) are filled in.
std::vector<NBestHypothesis> rescore_nbest(const std::vector<NBestHypothesis>& list,
                                           const Model& lm, RescoreMode mode,
                                           double lambda_rescore,
                                           bool include_eos_term = true);

}  // namespace mtlm

#endif  // MTLM_DECODING_H_
