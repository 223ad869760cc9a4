// src/acoustic_sim.cc

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

#include "mtlm/acoustic_sim.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mtlm/errors.h"
#include "mtlm/rng.h"

namespace mtlm {

namespace {

constexpr double kProbFloor = 1e-12;
constexpr std::size_t kConfusionSize = 5;
constexpr std::size_t kNBestLengthSlack = 3;

// eta mass is split across up to five non-special tokens distinct from the
// reference token; tiny vocabularies get whatever is available.  The split
// is non-uniform: a seeded primary confusor takes a random share of eta, so
// at higher noise the acoustically-best token is sometimes not the
// reference and language-model integration has something to repair.
Tensor make_row(int ref_token, double eta, std::size_t vocab_size, Rng& rng) {
  std::vector<int> pool;
  for (std::size_t t = Vocab::kNumSpecials; t < vocab_size; ++t) {
    if (static_cast<int>(t) != ref_token) pool.push_back(static_cast<int>(t));
  }
  const std::size_t set_size = std::min(kConfusionSize, pool.size());
  auto confusion = rng.sample_without_replacement(pool, set_size);
  const double primary_share = 0.5 + 0.45 * rng.uniform();

  Tensor row({vocab_size}, kProbFloor);
  row.data[static_cast<std::size_t>(ref_token)] += 1.0 - eta;
  if (confusion.size() == 1) {
    row.data[static_cast<std::size_t>(confusion[0])] += eta;
  } else if (!confusion.empty()) {
    row.data[static_cast<std::size_t>(confusion[0])] += eta * primary_share;
    const double rest =
        eta * (1.0 - primary_share) / static_cast<double>(confusion.size() - 1);
    for (std::size_t i = 1; i < confusion.size(); ++i) {
      row.data[static_cast<std::size_t>(confusion[i])] += rest;
    }
  }
  double z = 0.0;
  for (double p : row.data) z += p;
  for (double& p : row.data) p = std::log(p / z);
  return row;
}

}  // namespace

SyntheticAM::SyntheticAM(EncodedSequence reference, double eta, std::uint64_t seed,
                         std::size_t vocab_size)
    : reference_(std::move(reference)), eta_(eta), vocab_size_(vocab_size) {
  MTLM_CHECK(eta >= 0.0 && eta < 1.0, "SyntheticAM: eta must be in [0,1)");
  MTLM_CHECK(reference_.well_formed(vocab_size), "SyntheticAM: malformed reference");
  MTLM_CHECK(vocab_size > Vocab::kNumSpecials, "SyntheticAM: vocabulary has no body tokens");
  Rng rng(seed);

  const double u = rng.uniform();
  length_offset_ = u < eta_ / 2.0 ? -1 : (u < eta_ ? +1 : 0);

  const std::size_t body = body_length();
  rows_.reserve(body + 1);
  for (std::size_t i = 0; i < body; ++i) {
    rows_.push_back(make_row(reference_.ids[i + 1], eta_, vocab_size_, rng));
  }
  rows_.push_back(make_row(Vocab::kEos, eta_, vocab_size_, rng));
}

const Tensor& SyntheticAM::log_prob_row(std::size_t step) const {
  return rows_[std::min(step, rows_.size() - 1)];
}

const Tensor& am_log_prob(const SyntheticAM& am, const std::vector<int>& prefix) {
  MTLM_CHECK(!prefix.empty() && prefix.front() == Vocab::kSos,
             "am_log_prob: prefix must start with sos");
  return am.log_prob_row(prefix.size() - 1);
}

std::size_t ctc_length_estimate(const SyntheticAM& am) {
  const long est = static_cast<long>(am.body_length()) + am.length_offset_;
  return static_cast<std::size_t>(std::max(1L, est));
}

std::vector<NBestHypothesis> generate_nbest(const SyntheticAM& am, std::size_t n,
                                            std::size_t beam) {
  MTLM_CHECK(n >= 1 && n <= beam, "generate_nbest: need 1 <= n <= beam");
  const std::size_t cap = am.body_length() + kNBestLengthSlack;

  std::vector<int> alphabet;  // expansion tokens: body vocab plus eos
  for (std::size_t t = Vocab::kNumSpecials; t < am.vocab_size(); ++t) {
    alphabet.push_back(static_cast<int>(t));
  }

  struct Partial {
    std::vector<int> ids;  // starts with sos
    double score = 0.0;
  };
  std::vector<Partial> live{{{Vocab::kSos}, 0.0}};
  std::vector<NBestHypothesis> completed;

  for (std::size_t step = 0; step <= cap && !live.empty(); ++step) {
    std::vector<Partial> extensions;
    extensions.reserve(live.size() * (alphabet.size() + 1));
    for (const Partial& h : live) {
      const Tensor& dist = am.log_prob_row(step);
      // completion
      NBestHypothesis done;
      done.ids = h.ids;
      done.ids.push_back(Vocab::kEos);
      done.am_score = h.score + dist.data[Vocab::kEos];
      completed.push_back(std::move(done));
      // extensions
      if (step < cap) {
        for (int t : alphabet) {
          Partial e;
          e.ids = h.ids;
          e.ids.push_back(t);
          e.score = h.score + dist.data[static_cast<std::size_t>(t)];
          extensions.push_back(std::move(e));
        }
      }
    }
    std::sort(extensions.begin(), extensions.end(),
              [](const Partial& a, const Partial& b) {
                if (a.score != b.score) return a.score > b.score;
                return a.ids < b.ids;
              });
    if (extensions.size() > beam) extensions.resize(beam);
    live = std::move(extensions);
  }

  if (completed.empty()) {
    throw DataError("generate_nbest: no completed hypothesis within length cap");
  }
  std::sort(completed.begin(), completed.end(),
            [](const NBestHypothesis& a, const NBestHypothesis& b) {
              if (a.am_score != b.am_score) return a.am_score > b.am_score;
              return a.ids < b.ids;
            });
  if (completed.size() > n) completed.resize(n);
  return completed;
}

// --------------------------------------------------------------------------
// n-best file io
// --------------------------------------------------------------------------

namespace {

std::string escape_token(const std::string& t) { return t == " " ? "<sp>" : t; }
std::string unescape_token(const std::string& t) { return t == "<sp>" ? " " : t; }

std::string fmt_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

void write_nbest(const std::string& path, const std::vector<NBestEntry>& entries,
                 const Vocab& vocab) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("write_nbest: cannot open " + path);
  for (const NBestEntry& e : entries) {
    out << "UTT " << e.utt_id << '\n';
    for (const NBestHypothesis& h : e.hyps) {
      out << fmt_double(h.am_score) << '\t';
      bool first = true;
      for (std::size_t i = 1; i + 1 < h.ids.size(); ++i) {
        if (!first) out << ' ';
        out << escape_token(vocab.token(h.ids[i]));
        first = false;
      }
      if (h.lm_score.has_value()) {
        out << '\t' << fmt_double(*h.lm_score) << '\t'
            << fmt_double(h.combined_score.value_or(0.0));
        if (!h.lm_terms.empty()) {
          out << '\t';
          for (std::size_t i = 0; i < h.lm_terms.size(); ++i) {
            if (i > 0) out << ',';
            out << fmt_double(h.lm_terms[i]);
          }
        }
      }
      out << '\n';
    }
    out << '\n';
  }
}

std::vector<NBestEntry> parse_nbest(const std::string& path, const Vocab& vocab) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("parse_nbest: cannot open " + path);
  std::vector<NBestEntry> entries;
  NBestEntry* cur = nullptr;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&line_no, &path](const std::string& why) {
    throw DataError("parse_nbest: " + path + ":" + std::to_string(line_no) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      cur = nullptr;
      continue;
    }
    if (line.rfind("UTT ", 0) == 0) {
      entries.push_back(NBestEntry{line.substr(4), {}});
      cur = &entries.back();
      continue;
    }
    if (cur == nullptr) fail("hypothesis line outside an UTT block");
    const std::vector<std::string> fields = split(line, '\t');
    if (fields.size() < 2) fail("expected <am_score>\\t<tokens>");
    NBestHypothesis h;
    try {
      std::size_t pos = 0;
      h.am_score = std::stod(fields[0], &pos);
      if (pos != fields[0].size()) fail("malformed am_score");
    } catch (const std::exception&) {
      fail("malformed am_score");
    }
    h.ids.push_back(Vocab::kSos);
    if (!fields[1].empty()) {
      std::istringstream ts(fields[1]);
      std::string tok;
      while (ts >> tok) {
        const int id = vocab.id(unescape_token(tok));
        if (id < 0) fail("unknown token '" + tok + "'");
        h.ids.push_back(id);
      }
    }
    h.ids.push_back(Vocab::kEos);
    if (fields.size() >= 4) {
      try {
        h.lm_score = std::stod(fields[2]);
        h.combined_score = std::stod(fields[3]);
      } catch (const std::exception&) {
        fail("malformed score column");
      }
      if (fields.size() >= 5 && !fields[4].empty()) {
        for (const std::string& t : split(fields[4], ',')) {
          try {
            h.lm_terms.push_back(std::stod(t));
          } catch (const std::exception&) {
            fail("malformed term column");
          }
        }
      }
    } else if (fields.size() == 3) {
      fail("lm score without combined score");
    }
    cur->hyps.push_back(std::move(h));
  }
  return entries;
}

}  // namespace mtlm
