// include/mtlm/evaluation.h

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

#ifndef MTLM_EVALUATION_H_
#define MTLM_EVALUATION_H_

#include <array>
#include <string>
#include <vector>

namespace mtlm {

struct ErrorCounts {
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t substitutions = 0;
  std::size_t ref_len = 0;

  std::size_t total() const { return deletions + insertions + substitutions; }
  double wer() const {
    return ref_len == 0 ? 0.0
                        : static_cast<double>(total()) / static_cast<double>(ref_len);
  }
  ErrorCounts& operator+=(const ErrorCounts& o);
};

// Minimal-cost alignment with unit deletion/insertion/substitution costs.
// Backtrace ties break match > substitution > deletion > insertion so
// counts are deterministic.  Throws DataError on an empty reference.
ErrorCounts align(const std::vector<std::string>& ref,
                  const std::vector<std::string>& hyp);

enum class LengthBucket { kShort, kMedium, kLong };

// Short: fewer than 10 reference words; medium: 10-20; long: more than 20.
LengthBucket bucket(const std::vector<std::string>& ref);

const char* bucket_name(LengthBucket b);

struct SystemReport {
  std::string system;
  std::array<ErrorCounts, 3> by_bucket;  // indexed by LengthBucket
  ErrorCounts overall;
};

std::vector<std::string> split_words(const std::string& text);

// Aggregate align() per bucket and overall for one system's (ref, hyp)
// pairs.  Pair lists must be non-empty and equal-length.
SystemReport evaluate_corpus(const std::vector<std::string>& refs,
                             const std::vector<std::string>& hyps,
                             const std::string& system_label);

// Line-delimited records:
// system<TAB>bucket<TAB>D<TAB>I<TAB>S<TAB>overall<TAB>ref_words<TAB>wer_pct
std::string report_tsv(const std::vector<SystemReport>& reports);

// Aligned human-readable table.
std::string report_table(const std::vector<SystemReport>& reports);

}  // namespace mtlm

#endif  // MTLM_EVALUATION_H_
