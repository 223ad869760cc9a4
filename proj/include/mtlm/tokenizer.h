// include/mtlm/tokenizer.h

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

#ifndef MTLM_TOKENIZER_H_
#define MTLM_TOKENIZER_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <unordered_map>
#include <vector>

namespace mtlm {

enum class TokenMode { kChar, kWord };

// Token inventory with five reserved sentinels at fixed ids.  Immutable
// after construction; safe for concurrent use.
class Vocab {
 public:
  static constexpr int kSos = 0;
  static constexpr int kEos = 1;
  static constexpr int kMask = 2;
  static constexpr int kPad = 3;
  static constexpr int kBlank = 4;
  static constexpr int kNumSpecials = 5;

  // Frequency-ranked vocabulary from a corpus stream (one sentence per
  // line).  Ties break lexicographically; specials occupy ids 0..4; at most
  // max_size entries total.  Throws DataError on an empty corpus.
  static Vocab build(std::istream& corpus, TokenMode mode, std::size_t max_size);
  static Vocab build_from_file(const std::string& path, TokenMode mode,
                               std::size_t max_size);

  // One token per line, line number = id.  Loading re-checks the specials.
  void save(const std::string& path) const;
  static Vocab load(const std::string& path, TokenMode mode);

  std::size_t size() const { return id_to_token_.size(); }
  TokenMode mode() const { return mode_; }
  const std::string& token(int id) const;
  int id(const std::string& token) const;  // -1 if absent
  bool is_special(int id) const { return id >= 0 && id < kNumSpecials; }

  // FNV-1a over the newline-joined token list; ties checkpoints to the
  // vocabulary they were trained with.
  std::uint64_t fingerprint() const;

 private:
  TokenMode mode_ = TokenMode::kChar;
  std::vector<std::string> id_to_token_;
  std::unordered_map<std::string, int> token_to_id_;

  void add_token(const std::string& t);
};

// Token-id sequence bracketed by the start/end sentinels.
struct EncodedSequence {
  std::vector<int> ids;

  std::size_t length() const { return ids.size(); }
  bool well_formed(std::size_t vocab_size) const;
};

// sos + body + eos.  Unknown tokens raise DataError naming the item.
EncodedSequence encode(const Vocab& vocab, const std::string& text);

// Inverse of encode on its image; sentinel and pad ids are skipped.
// Unknown ids raise DataError.
std::string decode(const Vocab& vocab, const std::vector<int>& ids);

// Tokenize a line the way encode does (surface forms, no sentinels).
std::vector<std::string> surface_tokens(TokenMode mode, const std::string& text);

}  // namespace mtlm

#endif  // MTLM_TOKENIZER_H_
