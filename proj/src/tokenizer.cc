// src/tokenizer.cc

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

#include "mtlm/tokenizer.h"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "mtlm/errors.h"

namespace mtlm {

namespace {

const char* const kSpecialNames[Vocab::kNumSpecials] = {"<sos>", "<eos>", "<mask>",
                                                        "<pad>", "<blank>"};

}  // namespace

void Vocab::add_token(const std::string& t) {
  token_to_id_.emplace(t, static_cast<int>(id_to_token_.size()));
  id_to_token_.push_back(t);
}

Vocab Vocab::build(std::istream& corpus, TokenMode mode, std::size_t max_size) {
  // std::map keeps tie-broken frequency ranking deterministic.
  std::map<std::string, std::uint64_t> counts;
  std::string line;
  bool any = false;
  while (std::getline(corpus, line)) {
    any = true;
    for (const std::string& tok : surface_tokens(mode, line)) ++counts[tok];
  }
  if (!any) throw DataError("build_vocab: empty corpus");

  Vocab v;
  v.mode_ = mode;
  for (const char* s : kSpecialNames) v.add_token(s);

  std::vector<std::pair<std::string, std::uint64_t>> ranked(counts.begin(),
                                                            counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     if (a.second != b.second) return a.second > b.second;
                     return a.first < b.first;
                   });
  for (const auto& [tok, cnt] : ranked) {
    (void)cnt;
    if (v.size() >= max_size) break;
    v.add_token(tok);
  }
  return v;
}

Vocab Vocab::build_from_file(const std::string& path, TokenMode mode,
                             std::size_t max_size) {
  std::ifstream in(path);
  if (!in) throw DataError("build_vocab: cannot open corpus file: " + path);
  return build(in, mode, max_size);
}

void Vocab::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("vocab save: cannot open " + path);
  for (const std::string& t : id_to_token_) out << t << '\n';
}

Vocab Vocab::load(const std::string& path, TokenMode mode) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("vocab load: cannot open " + path);
  Vocab v;
  v.mode_ = mode;
  std::string line;
  while (std::getline(in, line)) v.add_token(line);
  if (v.size() < kNumSpecials) throw DataError("vocab load: file too short: " + path);
  for (int i = 0; i < kNumSpecials; ++i) {
    if (v.id_to_token_[static_cast<std::size_t>(i)] != kSpecialNames[i]) {
      throw DataError("vocab load: special token mismatch at id " + std::to_string(i));
    }
  }
  if (v.token_to_id_.size() != v.id_to_token_.size()) {
    throw DataError("vocab load: duplicate token in " + path);
  }
  return v;
}

const std::string& Vocab::token(int id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size()) {
    throw DataError("vocab: id out of range: " + std::to_string(id));
  }
  return id_to_token_[static_cast<std::size_t>(id)];
}

int Vocab::id(const std::string& token) const {
  auto it = token_to_id_.find(token);
  return it == token_to_id_.end() ? -1 : it->second;
}

std::uint64_t Vocab::fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a offset basis
  auto mix = [&h](char c) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ull;
  };
  for (const std::string& t : id_to_token_) {
    for (char c : t) mix(c);
    mix('\n');
  }
  return h;
}

bool EncodedSequence::well_formed(std::size_t vocab_size) const {
  if (ids.size() < 2) return false;
  if (ids.front() != Vocab::kSos || ids.back() != Vocab::kEos) return false;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || static_cast<std::size_t>(ids[i]) >= vocab_size) return false;
    if (i > 0 && ids[i] == Vocab::kSos) return false;
    if (i + 1 < ids.size() && ids[i] == Vocab::kEos) return false;
  }
  return true;
}

std::vector<std::string> surface_tokens(TokenMode mode, const std::string& text) {
  std::vector<std::string> toks;
  if (mode == TokenMode::kChar) {
    toks.reserve(text.size());
    for (char c : text) toks.emplace_back(1, c);
  } else {
    std::istringstream ss(text);
    std::string w;
    while (ss >> w) toks.push_back(w);
  }
  return toks;
}

EncodedSequence encode(const Vocab& vocab, const std::string& text) {
  EncodedSequence seq;
  seq.ids.push_back(Vocab::kSos);
  for (const std::string& tok : surface_tokens(vocab.mode(), text)) {
    const int id = vocab.id(tok);
    if (id < 0) throw DataError("encode: out-of-vocabulary item: '" + tok + "'");
    seq.ids.push_back(id);
  }
  seq.ids.push_back(Vocab::kEos);
  return seq;
}

std::string decode(const Vocab& vocab, const std::vector<int>& ids) {
  std::string out;
  bool first = true;
  for (int id : ids) {
    if (vocab.is_special(id)) {
      vocab.token(id);  // range check, throws on unknown id
      continue;
    }
    const std::string& t = vocab.token(id);
    if (vocab.mode() == TokenMode::kWord && !first) out += ' ';
    out += t;
    first = false;
  }
  return out;
}

}  // namespace mtlm
