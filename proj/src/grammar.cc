// src/grammar.cc

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

#include "mtlm/grammar.h"

#include "mtlm/errors.h"
#include "mtlm/rng.h"

namespace mtlm {

namespace {

constexpr char kConsonants[] = "bcdfghjklmnprstvwz";
constexpr char kVowels[] = "aeiou";

}  // namespace

std::vector<std::string> generate_sentences(std::size_t count, std::uint64_t seed,
                                            const GrammarConfig& config) {
  MTLM_CHECK(config.min_words >= 1 && config.min_words <= config.max_words,
             "GrammarConfig: bad word range");
  MTLM_CHECK(config.min_syllables >= 1 && config.min_syllables <= config.max_syllables,
             "GrammarConfig: bad syllable range");
  const std::size_t n_cons = sizeof(kConsonants) - 1;
  const std::size_t n_vow = sizeof(kVowels) - 1;
  Rng rng(seed);
  std::vector<std::string> out;
  out.reserve(count);
  for (std::size_t s = 0; s < count; ++s) {
    const std::size_t words =
        config.min_words + rng.uniform_int(config.max_words - config.min_words + 1);
    std::string sentence;
    for (std::size_t w = 0; w < words; ++w) {
      if (w > 0) sentence += ' ';
      const std::size_t syllables =
          config.min_syllables +
          rng.uniform_int(config.max_syllables - config.min_syllables + 1);
      for (std::size_t y = 0; y < syllables; ++y) {
        sentence += kConsonants[rng.uniform_int(n_cons)];
        sentence += kVowels[rng.uniform_int(n_vow)];
      }
    }
    out.push_back(std::move(sentence));
  }
  return out;
}

}  // namespace mtlm
