// include/mtlm/grammar.h

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

#ifndef MTLM_GRAMMAR_H_
#define MTLM_GRAMMAR_H_

#include <cstdint>
#include <string>
#include <vector>

namespace mtlm {

struct GrammarConfig {
  std::size_t min_words = 2;
  std::size_t max_words = 4;
  std::size_t min_syllables = 1;
  std::size_t max_syllables = 2;
};

// Deterministic regular-grammar sentence sampler: words are
// consonant-vowel syllable chains, sentences are short word runs.  The
// strict consonant/vowel alternation gives a char-level model plenty of
// structure to learn, and the char inventory (18 consonants, 5 vowels,
// space) plus the 5 sentinels lands near a 30-token vocabulary.
std::vector<std::string> generate_sentences(std::size_t count, std::uint64_t seed,
                                            const GrammarConfig& config = {});

}  // namespace mtlm

#endif  // MTLM_GRAMMAR_H_
