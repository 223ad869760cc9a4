// src/evaluation.cc

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

#include "mtlm/evaluation.h"

#include <cstdio>
#include <sstream>

#include "mtlm/errors.h"

namespace mtlm {

ErrorCounts& ErrorCounts::operator+=(const ErrorCounts& o) {
  deletions += o.deletions;
  insertions += o.insertions;
  substitutions += o.substitutions;
  ref_len += o.ref_len;
  return *this;
}

ErrorCounts align(const std::vector<std::string>& ref,
                  const std::vector<std::string>& hyp) {
  if (ref.empty()) throw DataError("align: empty reference");
  const std::size_t r = ref.size(), h = hyp.size();

  // A minimal alignment with R reference words, H hypothesis words, cost c
  // and m matches has its decomposition fully determined:
  //   S = R + H - 2m - c,  D = R - m - S,  I = H - m - S.
  // So the tie-break order (match preferred over everything else) reduces
  // to maximizing matches at minimal cost, which keeps the counts
  // deterministic AND exactly mirror-symmetric (D and I swap when the
  // arguments swap).
  struct Cell {
    std::size_t cost;
    std::size_t matches;
  };
  std::vector<Cell> dp((r + 1) * (h + 1));
  auto d = [&dp, h](std::size_t i, std::size_t j) -> Cell& {
    return dp[i * (h + 1) + j];
  };
  auto better = [](const Cell& a, const Cell& b) {
    return a.cost < b.cost || (a.cost == b.cost && a.matches > b.matches);
  };
  for (std::size_t j = 0; j <= h; ++j) d(0, j) = {j, 0};
  for (std::size_t i = 0; i <= r; ++i) d(i, 0) = {i, 0};
  for (std::size_t i = 1; i <= r; ++i) {
    for (std::size_t j = 1; j <= h; ++j) {
      const Cell diag = d(i - 1, j - 1);
      Cell best = ref[i - 1] == hyp[j - 1]
                      ? Cell{diag.cost, diag.matches + 1}
                      : Cell{diag.cost + 1, diag.matches};
      const Cell del{d(i - 1, j).cost + 1, d(i - 1, j).matches};
      const Cell ins{d(i, j - 1).cost + 1, d(i, j - 1).matches};
      if (better(del, best)) best = del;
      if (better(ins, best)) best = ins;
      d(i, j) = best;
    }
  }

  const Cell final_cell = d(r, h);
  ErrorCounts counts;
  counts.ref_len = r;
  counts.substitutions = r + h - 2 * final_cell.matches - final_cell.cost;
  counts.deletions = r - final_cell.matches - counts.substitutions;
  counts.insertions = h - final_cell.matches - counts.substitutions;
  return counts;
}

LengthBucket bucket(const std::vector<std::string>& ref) {
  if (ref.empty()) throw DataError("bucket: empty reference");
  if (ref.size() < 10) return LengthBucket::kShort;
  if (ref.size() <= 20) return LengthBucket::kMedium;
  return LengthBucket::kLong;
}

const char* bucket_name(LengthBucket b) {
  switch (b) {
    case LengthBucket::kShort:
      return "S";
    case LengthBucket::kMedium:
      return "M";
    case LengthBucket::kLong:
      return "L";
  }
  return "?";
}

std::vector<std::string> split_words(const std::string& text) {
  std::vector<std::string> words;
  std::istringstream ss(text);
  std::string w;
  while (ss >> w) words.push_back(w);
  return words;
}

SystemReport evaluate_corpus(const std::vector<std::string>& refs,
                             const std::vector<std::string>& hyps,
                             const std::string& system_label) {
  if (refs.empty()) throw DataError("evaluate_corpus: no pairs");
  if (refs.size() != hyps.size()) {
    throw DataError("evaluate_corpus: reference/hypothesis count mismatch");
  }
  SystemReport report;
  report.system = system_label;
  for (std::size_t i = 0; i < refs.size(); ++i) {
    const std::vector<std::string> r = split_words(refs[i]);
    const std::vector<std::string> h = split_words(hyps[i]);
    const ErrorCounts c = align(r, h);
    report.by_bucket[static_cast<std::size_t>(bucket(r))] += c;
    report.overall += c;
  }
  return report;
}

namespace {

void tsv_row(std::string& out, const std::string& system, const char* bucket_label,
             const ErrorCounts& c) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%s\t%s\t%zu\t%zu\t%zu\t%zu\t%zu\t%.4f\n",
                system.c_str(), bucket_label, c.deletions, c.insertions,
                c.substitutions, c.total(), c.ref_len, 100.0 * c.wer());
  out += buf;
}

}  // namespace

std::string report_tsv(const std::vector<SystemReport>& reports) {
  std::string out;
  for (const SystemReport& r : reports) {
    tsv_row(out, r.system, "S", r.by_bucket[0]);
    tsv_row(out, r.system, "M", r.by_bucket[1]);
    tsv_row(out, r.system, "L", r.by_bucket[2]);
    tsv_row(out, r.system, "ALL", r.overall);
  }
  return out;
}

std::string report_table(const std::vector<SystemReport>& reports) {
  std::string out;
  char buf[256];
  std::snprintf(buf, sizeof(buf), "%-20s %-5s %8s %8s %8s %8s %10s %8s\n", "system",
                "len", "del", "ins", "sub", "total", "ref_words", "wer%");
  out += buf;
  for (const SystemReport& r : reports) {
    const std::pair<const char*, const ErrorCounts*> rows[] = {
        {"S", &r.by_bucket[0]},
        {"M", &r.by_bucket[1]},
        {"L", &r.by_bucket[2]},
        {"ALL", &r.overall}};
    for (const auto& [label, c] : rows) {
      std::snprintf(buf, sizeof(buf), "%-20s %-5s %8zu %8zu %8zu %8zu %10zu %8.2f\n",
                    r.system.c_str(), label, c->deletions, c->insertions,
                    c->substitutions, c->total(), c->ref_len, 100.0 * c->wer());
      out += buf;
    }
  }
  return out;
}

}  // namespace mtlm
