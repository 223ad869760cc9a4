// src/decoding.cc

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

#include "mtlm/decoding.h"

#include <algorithm>
#include <cmath>

#include "mtlm/errors.h"
#include "mtlm/masks.h"

namespace mtlm {

void BeamConfig::validate() const {
  MTLM_CHECK(beam >= 1, "BeamConfig: beam must be >= 1");
  MTLM_CHECK(lambda >= 0.0, "BeamConfig: lambda must be >= 0");
}

Tensor guide_score(const Tensor& am_dist, const Tensor& lm_dist,
                   const BeamConfig& config) {
  MTLM_CHECK(am_dist.numel() == lm_dist.numel(), "guide_score: size mismatch");
  Tensor out = am_dist;
  if (config.guide_mode == GuideMode::kMtlmS2S) {
    for (std::size_t i = 0; i < out.numel(); ++i) {
      out.data[i] += config.lambda * lm_dist.data[i];
    }
  }
  return out;
}

namespace {

// Next-token log-distributions for a set of equal-length prefixes, one
// causal forward per prefix evaluated as a single batch.
std::vector<Tensor> lm_next_rows(const Model& lm,
                                 const std::vector<std::vector<int>>& prefixes) {
  std::vector<AttentionMask> masks;
  masks.reserve(prefixes.size());
  for (const auto& p : prefixes) masks.push_back(causal_mask(p.size()));
  std::vector<Tensor> lp = forward_batch(lm, prefixes, masks);
  std::vector<Tensor> rows;
  rows.reserve(lp.size());
  for (std::size_t b = 0; b < lp.size(); ++b) {
    const std::size_t last = prefixes[b].size() - 1;
    Tensor row({lp[b].cols()});
    for (std::size_t j = 0; j < lp[b].cols(); ++j) row.data[j] = lp[b].at(last, j);
    rows.push_back(std::move(row));
  }
  return rows;
}

bool better_hypothesis(const Hypothesis& a, const Hypothesis& b, double lambda) {
  const double ca = a.combined(lambda), cb = b.combined(lambda);
  if (ca != cb) return ca > cb;
  if (a.am_score != b.am_score) return a.am_score > b.am_score;
  return a.ids < b.ids;
}

}  // namespace

DecodeResult shallow_fusion_decode(const SyntheticAM& am, const Model& lm,
                                   const BeamConfig& config) {
  config.validate();
  MTLM_CHECK(lm.config.vocab_size == am.vocab_size(),
             "shallow_fusion_decode: LM and channel vocabulary sizes differ");
  const double lambda = config.lambda;
  const std::size_t est = ctc_length_estimate(am);
  const std::size_t lo = est > config.length_window ? est - config.length_window : 0;
  // Prefixes carry body + sos and the LM forward needs one row per token,
  // so the admissible body length is also capped by the LM context size.
  const std::size_t hi =
      std::min(est + config.length_window, lm.config.max_len - 2);

  std::vector<int> alphabet;
  for (std::size_t t = Vocab::kNumSpecials; t < am.vocab_size(); ++t) {
    alphabet.push_back(static_cast<int>(t));
  }

  std::vector<Hypothesis> live{Hypothesis{{Vocab::kSos}, 0.0, 0.0, false}};
  std::vector<Hypothesis> completed;
  Hypothesis deepest_partial = live.front();

  for (std::size_t step = 0; step <= hi && !live.empty(); ++step) {
    std::vector<std::vector<int>> prefixes;
    prefixes.reserve(live.size());
    for (const Hypothesis& h : live) prefixes.push_back(h.ids);
    const std::vector<Tensor> lm_rows = lm_next_rows(lm, prefixes);
    const Tensor& am_row = am.log_prob_row(step);

    std::vector<Hypothesis> extensions;
    for (std::size_t hi_idx = 0; hi_idx < live.size(); ++hi_idx) {
      const Hypothesis& h = live[hi_idx];
      const Tensor& lm_row = lm_rows[hi_idx];
      const Tensor guide = guide_score(am_row, lm_row, config);

      // guide-selected candidate tokens, body alphabet plus eos
      std::vector<int> candidates = alphabet;
      candidates.push_back(Vocab::kEos);
      std::sort(candidates.begin(), candidates.end(), [&guide](int a, int b) {
        const double ga = guide.data[static_cast<std::size_t>(a)];
        const double gb = guide.data[static_cast<std::size_t>(b)];
        if (ga != gb) return ga > gb;
        return a < b;
      });
      if (candidates.size() > config.beam) candidates.resize(config.beam);

      for (int tok : candidates) {
        Hypothesis e = h;
        e.am_score += am_row.data[static_cast<std::size_t>(tok)];
        e.lm_score += lm_row.data[static_cast<std::size_t>(tok)];
        e.ids.push_back(tok);
        if (tok == Vocab::kEos) {
          e.completed = true;
          if (step >= lo && step <= hi) completed.push_back(std::move(e));
          // completions outside the window are pruned
        } else if (step + 1 <= hi) {
          extensions.push_back(std::move(e));
        }
        // extensions past the window are pruned
      }
    }
    std::sort(extensions.begin(), extensions.end(),
              [lambda](const Hypothesis& a, const Hypothesis& b) {
                return better_hypothesis(a, b, lambda);
              });
    if (extensions.size() > config.beam) extensions.resize(config.beam);
    live = std::move(extensions);
    if (!live.empty()) deepest_partial = live.front();
  }

  if (completed.empty()) {
    throw DecodeError("shallow_fusion_decode: no admissible completion",
                      deepest_partial);
  }
  std::sort(completed.begin(), completed.end(),
            [lambda](const Hypothesis& a, const Hypothesis& b) {
              return better_hypothesis(a, b, lambda);
            });
  DecodeResult result;
  result.best = completed.front();
  result.completed = std::move(completed);
  result.length_estimate = est;
  return result;
}

double score_unidirectional(const Model& lm, const std::vector<int>& ids) {
  const std::size_t n = ids.size();
  MTLM_CHECK(n >= 2, "score_unidirectional: sequence too short");
  MTLM_CHECK(ids.front() == Vocab::kSos, "score_unidirectional: missing sos");
  const std::vector<Tensor> lp =
      forward_batch(lm, {ids}, {causal_mask(n)});
  double score = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    score += lp[0].at(i - 1, static_cast<std::size_t>(ids[i]));
  }
  return score;
}

double score_bidirectional(const Model& lm, const std::vector<int>& ids,
                           std::vector<double>* terms, bool include_eos_term) {
  const std::size_t n = ids.size();
  MTLM_CHECK(n >= 2, "score_bidirectional: sequence too short");
  MTLM_CHECK(ids.front() == Vocab::kSos, "score_bidirectional: missing sos");
  const std::size_t last = include_eos_term ? n - 1 : n - 2;
  if (terms) terms->clear();
  if (last < 1) return 0.0;

  std::vector<std::vector<int>> variants;
  std::vector<AttentionMask> masks;
  variants.reserve(last);
  masks.reserve(last);
  for (std::size_t i = 1; i <= last; ++i) {
    MaskPlan plan;
    plan.n = n;
    plan.task = MaskTask::kBmlm;
    plan.targets = {i};
    plan.masked = {i};
    masks.push_back(bmlm_mask(plan));
    variants.push_back(lm.config.mask_inputs
                           ? apply_mask_tokens(ids, plan, Vocab::kMask)
                           : ids);
  }
  const std::vector<Tensor> lp = forward_batch(lm, variants, masks);
  double score = 0.0;
  for (std::size_t i = 1; i <= last; ++i) {
    const double term = lp[i - 1].at(i - 1, static_cast<std::size_t>(ids[i]));
    score += term;
    if (terms) terms->push_back(term);
  }
  return score;
}

std::vector<NBestHypothesis> rescore_nbest(const std::vector<NBestHypothesis>& list,
                                           const Model& lm, RescoreMode mode,
                                           double lambda_rescore,
                                           bool include_eos_term) {
  if (list.empty()) throw DataError("rescore_nbest: empty n-best list");
  MTLM_CHECK(lambda_rescore >= 0.0, "rescore_nbest: lambda must be >= 0");
  std::vector<NBestHypothesis> out = list;
  for (NBestHypothesis& h : out) {
    if (mode == RescoreMode::kUnidirectional) {
      h.lm_score = score_unidirectional(lm, h.ids);
      h.lm_terms.clear();
    } else {
      std::vector<double> terms;
      h.lm_score = score_bidirectional(lm, h.ids, &terms, include_eos_term);
      h.lm_terms = std::move(terms);
    }
    h.combined_score = h.am_score + lambda_rescore * *h.lm_score;
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const NBestHypothesis& a, const NBestHypothesis& b) {
                     return *a.combined_score > *b.combined_score;
                   });
  return out;
}

}  // namespace mtlm
