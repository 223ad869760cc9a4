// tests/test_tokenizer.cc

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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "mtlm/errors.h"
#include "mtlm/grammar.h"
#include "mtlm/tokenizer.h"

using namespace mtlm;

TEST_CASE("char vocabulary from a tiny corpus") {
  std::istringstream corpus("ab ba");
  Vocab v = Vocab::build(corpus, TokenMode::kChar, 64);
  // specials, then by frequency (a:2, b:2, space:1), ties lexicographic
  CHECK(v.size() == 8);
  CHECK(v.token(Vocab::kSos) == "<sos>");
  CHECK(v.token(Vocab::kEos) == "<eos>");
  CHECK(v.token(Vocab::kMask) == "<mask>");
  CHECK(v.token(Vocab::kPad) == "<pad>");
  CHECK(v.token(Vocab::kBlank) == "<blank>");
  CHECK(v.id("a") == 5);
  CHECK(v.id("b") == 6);
  CHECK(v.id(" ") == 7);

  EncodedSequence seq = encode(v, "ab");
  CHECK(seq.ids == std::vector<int>{Vocab::kSos, 5, 6, Vocab::kEos});
  CHECK(seq.well_formed(v.size()));
  CHECK(decode(v, seq.ids) == "ab");
}

TEST_CASE("max_size reserves the specials first") {
  std::istringstream corpus("abc");
  Vocab v = Vocab::build(corpus, TokenMode::kChar, 5);
  CHECK(v.size() == 5);
  CHECK(v.id("a") == -1);
}

TEST_CASE("empty corpus rejected") {
  std::istringstream corpus("");
  CHECK_THROWS_AS(Vocab::build(corpus, TokenMode::kChar, 10), DataError);
}

TEST_CASE("encode errors name the offending item") {
  std::istringstream corpus("ab");
  Vocab v = Vocab::build(corpus, TokenMode::kChar, 64);
  try {
    encode(v, "ax");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("'x'") != std::string::npos);
  }
}

TEST_CASE("decode skips sentinels and pads") {
  std::istringstream corpus("ab");
  Vocab v = Vocab::build(corpus, TokenMode::kChar, 64);
  CHECK(decode(v, {Vocab::kSos, Vocab::kEos}) == "");
  CHECK(decode(v, {Vocab::kSos, v.id("a"), Vocab::kPad, v.id("b"), Vocab::kEos}) ==
        "ab");
  CHECK_THROWS_AS(decode(v, {Vocab::kSos, 99, Vocab::kEos}), DataError);
  CHECK(encode(v, "").ids == std::vector<int>{Vocab::kSos, Vocab::kEos});
}

TEST_CASE("word mode round trip") {
  std::istringstream corpus("the cat sat\nthe dog ran");
  Vocab v = Vocab::build(corpus, TokenMode::kWord, 64);
  CHECK(v.id("the") == 5);  // most frequent first
  const std::string text = "the dog sat";
  CHECK(decode(v, encode(v, text).ids) == text);
}

TEST_CASE("round trips over generated corpora") {
  const auto sentences = generate_sentences(200, 42);
  std::string joined;
  for (const auto& s : sentences) joined += s + "\n";
  for (TokenMode mode : {TokenMode::kChar, TokenMode::kWord}) {
    std::istringstream corpus(joined);
    Vocab v = Vocab::build(corpus, mode, 4096);
    for (const auto& s : sentences) {
      CHECK(decode(v, encode(v, s).ids) == s);
    }
  }
}

TEST_CASE("vocabulary construction is deterministic and persists exactly") {
  const auto sentences = generate_sentences(50, 3);
  std::string joined;
  for (const auto& s : sentences) joined += s + "\n";
  std::istringstream c1(joined), c2(joined);
  Vocab v1 = Vocab::build(c1, TokenMode::kChar, 256);
  Vocab v2 = Vocab::build(c2, TokenMode::kChar, 256);
  CHECK(v1.fingerprint() == v2.fingerprint());

  const auto path = std::filesystem::temp_directory_path() / "mtlm_vocab_test.txt";
  v1.save(path.string());
  Vocab loaded = Vocab::load(path.string(), TokenMode::kChar);
  CHECK(loaded.fingerprint() == v1.fingerprint());
  CHECK(loaded.size() == v1.size());
  for (std::size_t i = 0; i < v1.size(); ++i) {
    CHECK(loaded.token(static_cast<int>(i)) == v1.token(static_cast<int>(i)));
  }
  // the space token survives the text format
  CHECK(loaded.id(" ") == v1.id(" "));
  std::filesystem::remove(path);
}
