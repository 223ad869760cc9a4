// src/masks.cc

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

#include "mtlm/masks.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "mtlm/errors.h"

namespace mtlm {

namespace {

bool sorted_distinct_in_range(const std::vector<std::size_t>& v,
                              std::size_t lo, std::size_t hi) {
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] < lo || v[i] > hi) return false;
    if (i > 0 && v[i] <= v[i - 1]) return false;
  }
  return true;
}

std::size_t mask_count(std::size_t n, double rate) {
  const auto k = static_cast<std::size_t>(std::lround(rate * static_cast<double>(n - 1)));
  return std::max<std::size_t>(1, k);
}

}  // namespace

void MaskPlan::validate() const {
  MTLM_CHECK(n >= 2, "MaskPlan: sequence too short");
  MTLM_CHECK(sorted_distinct_in_range(targets, 1, n - 1),
             "MaskPlan: targets must be ascending distinct positions in {1..n-1}");
  MTLM_CHECK(sorted_distinct_in_range(masked, 0, n - 1),
             "MaskPlan: masked must be ascending distinct positions in {0..n-1}");
  if (task == MaskTask::kUlm) {
    MTLM_CHECK(masked.empty(), "MaskPlan: ULM has no masked positions");
  }
  if (task == MaskTask::kBmlm) {
    MTLM_CHECK(masked.empty() || masked.front() >= 1,
               "MaskPlan: BMLM cannot mask the start sentinel");
  }
}

bool MaskPlan::sampled_invariants_hold() const {
  if (n < 2) return false;
  if (!sorted_distinct_in_range(targets, 1, n - 1)) return false;
  switch (task) {
    case MaskTask::kUlm: {
      if (!masked.empty()) return false;
      if (targets.size() != n - 1) return false;
      return true;
    }
    case MaskTask::kBmlm: {
      if (targets != masked) return false;
      return sorted_distinct_in_range(masked, 1, n - 1);
    }
    case MaskTask::kUmlm: {
      if (targets.size() != masked.size()) return false;
      if (!sorted_distinct_in_range(masked, 0, n - 1)) return false;
      // every target needs at least one masked position strictly before it
      for (std::size_t t : targets) {
        bool has_before = std::any_of(masked.begin(), masked.end(),
                                      [t](std::size_t m) { return m < t; });
        if (!has_before) return false;
      }
      return true;
    }
  }
  return false;
}

std::size_t AttentionMask::zero_entries_in_row(std::size_t q) const {
  std::size_t count = 0;
  for (std::size_t k = 0; k < n_; ++k) {
    if (allowed(q, k)) ++count;
  }
  return count;
}

std::size_t read_row(std::size_t target) {
  MTLM_CHECK(target >= 1, "read_row: position 0 is never a target");
  return target - 1;
}

std::vector<std::size_t> read_rows_of(const std::vector<std::size_t>& targets) {
  std::vector<std::size_t> rows;
  rows.reserve(targets.size());
  for (std::size_t t : targets) rows.push_back(read_row(t));
  return rows;
}

AttentionMask causal_mask(std::size_t n) {
  MTLM_CHECK(n >= 1, "causal_mask: empty sequence");
  AttentionMask m(n);
  for (std::size_t q = 0; q < n; ++q) {
    for (std::size_t k = q + 1; k < n; ++k) m.block(q, k);
  }
  return m;
}

AttentionMask ulm_mask(std::size_t n) {
  MTLM_CHECK(n >= 2, "ulm_mask: n must be >= 2");
  return causal_mask(n);
}

AttentionMask bmlm_mask(const MaskPlan& plan) {
  MTLM_CHECK(plan.task == MaskTask::kBmlm, "bmlm_mask: plan task mismatch");
  plan.validate();
  AttentionMask m(plan.n);
  for (std::size_t k : plan.masked) {
    for (std::size_t q = 0; q < plan.n; ++q) m.block(q, k);
  }
  return m;
}

AttentionMask umlm_mask(const MaskPlan& plan) {
  MTLM_CHECK(plan.task == MaskTask::kUmlm, "umlm_mask: plan task mismatch");
  plan.validate();
  AttentionMask m = causal_mask(plan.n);
  for (std::size_t k : plan.masked) {
    for (std::size_t q = k + 1; q < plan.n; ++q) m.block(q, k);
  }
  return m;
}

MaskPlan sample_bmlm_plan(std::size_t n, double rate, Rng& rng) {
  if (n < 3) throw ContractViolation("sample_bmlm_plan: sequence too short (n < 3)");
  MTLM_CHECK(rate > 0.0 && rate < 1.0, "sample_bmlm_plan: rate must be in (0,1)");
  std::vector<std::size_t> pool;
  pool.reserve(n - 1);
  for (std::size_t p = 1; p < n; ++p) pool.push_back(p);
  auto picked = rng.sample_without_replacement(pool, mask_count(n, rate));
  std::sort(picked.begin(), picked.end());
  MaskPlan plan;
  plan.n = n;
  plan.task = MaskTask::kBmlm;
  plan.targets = picked;
  plan.masked = std::move(picked);
  return plan;
}

MaskPlan sample_umlm_plan(std::size_t n, double rate, Rng& rng) {
  if (n < 3) throw ContractViolation("sample_umlm_plan: sequence too short (n < 3)");
  MTLM_CHECK(rate > 0.0 && rate < 1.0, "sample_umlm_plan: rate must be in (0,1)");
  std::vector<std::size_t> pool;
  pool.reserve(n - 1);
  for (std::size_t p = 1; p < n; ++p) pool.push_back(p);
  auto targets = rng.sample_without_replacement(pool, mask_count(n, rate));
  std::sort(targets.begin(), targets.end());

  std::set<std::size_t> masked;
  std::vector<std::size_t> kept;
  for (std::size_t t : targets) {
    std::vector<std::size_t> avail;
    for (std::size_t p = 0; p < t; ++p) {
      if (masked.count(p) == 0) avail.push_back(p);
    }
    if (avail.empty()) continue;  // left context exhausted: drop this target
    masked.insert(avail[rng.uniform_int(avail.size())]);
    kept.push_back(t);
  }
  MaskPlan plan;
  plan.n = n;
  plan.task = MaskTask::kUmlm;
  plan.targets = std::move(kept);
  plan.masked.assign(masked.begin(), masked.end());
  return plan;
}

std::vector<int> apply_mask_tokens(const std::vector<int>& ids,
                                   const MaskPlan& plan, int mask_token_id) {
  MTLM_CHECK(ids.size() == plan.n, "apply_mask_tokens: plan length mismatch");
  std::vector<int> out = ids;
  for (std::size_t m : plan.masked) out[m] = mask_token_id;
  return out;
}

}  // namespace mtlm
