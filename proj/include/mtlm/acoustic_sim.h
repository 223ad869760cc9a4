// include/mtlm/acoustic_sim.h

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

#ifndef MTLM_ACOUSTIC_SIM_H_
#define MTLM_ACOUSTIC_SIM_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtlm/tensor.h"
#include "mtlm/tokenizer.h"

namespace mtlm {

// Synthetic memoryless acoustic channel standing in for a trained AM.  A
// hidden reference transcription plays the role of the speech input: at
// step i the channel emits mass 1 - eta on the reference token (eos once
// past the end) and spreads eta over a seeded confusion set, with a 1e-12
// floor on every token so log-probabilities stay finite.  Distributions do
// not depend on the decoded prefix.
class SyntheticAM {
 public:
  SyntheticAM(EncodedSequence reference, double eta, std::uint64_t seed,
              std::size_t vocab_size);

  std::size_t vocab_size() const { return vocab_size_; }
  std::size_t body_length() const { return reference_.length() - 2; }
  const EncodedSequence& reference() const { return reference_; }
  double eta() const { return eta_; }

  // Log-distribution over the next token after `step` body tokens have
  // been emitted.  Memoryless: any step >= body_length() sees the same
  // eos-centered row.
  const Tensor& log_prob_row(std::size_t step) const;

 private:
  EncodedSequence reference_;
  double eta_;
  std::size_t vocab_size_;
  std::vector<Tensor> rows_;  // steps 0..body_length(); last row reused beyond
  int length_offset_ = 0;

  friend std::size_t ctc_length_estimate(const SyntheticAM& am);
};

// The term log P_AM(y | X, Y_<prefix>): a log-distribution over the vocab
// for the token following `prefix` (which starts with sos).  The prefix
// content is ignored by construction.
const Tensor& am_log_prob(const SyntheticAM& am, const std::vector<int>& prefix);

// CTC-greedy-style transcription length estimate: reference body length
// plus a seeded offset in {-1, 0, +1} drawn with probabilities
// {eta/2, 1 - eta, eta/2}; never below 1.
std::size_t ctc_length_estimate(const SyntheticAM& am);

struct NBestHypothesis {
  std::vector<int> ids;  // sos ... eos
  double am_score = 0.0;
  std::optional<double> lm_score;
  std::optional<double> combined_score;
  std::vector<double> lm_terms;  // per-position terms, bidirectional debug
};

// AM-only beam search, all expansions scored by the channel alone.  Returns
// up to n completed hypotheses sorted by am_score descending (ties by token
// order).  Throws DataError when nothing completes within the length cap
// body_length() + 3.
std::vector<NBestHypothesis> generate_nbest(const SyntheticAM& am, std::size_t n,
                                            std::size_t beam);

struct NBestEntry {
  std::string utt_id;
  std::vector<NBestHypothesis> hyps;
};

// Line format, one utterance per block:
//   UTT <id>
//   <am_score>\t<space-joined tokens>[\t<lm>\t<combined>[\t<terms,...>]]
//   ...
//   <blank line>
// A token consisting of a single space is written as "<sp>".  Scores are
// printed with %.17g so parsing reproduces the exact doubles.
void write_nbest(const std::string& path, const std::vector<NBestEntry>& entries,
                 const Vocab& vocab);
std::vector<NBestEntry> parse_nbest(const std::string& path, const Vocab& vocab);

}  // namespace mtlm

#endif  // MTLM_ACOUSTIC_SIM_H_
