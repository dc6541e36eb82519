// src/harness/metrics.cc


// Copyright 2026  The ftilm Authors

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

#include "ftilm/harness/metrics.h"

#include <algorithm>

#include "ftilm/base/errors.h"

namespace ftilm {

std::vector<EditOp> AlignWords(const std::vector<std::string> &hyp,
                               const std::vector<std::string> &ref) {
  const size_t R = ref.size(), H = hyp.size();
  // cost[i][j]: ref[0..i) against hyp[0..j)
  std::vector<std::vector<int>> cost(R + 1, std::vector<int>(H + 1));
  for (size_t i = 0; i <= R; ++i) cost[i][0] = static_cast<int>(i);
  for (size_t j = 0; j <= H; ++j) cost[0][j] = static_cast<int>(j);
  for (size_t i = 1; i <= R; ++i)
    for (size_t j = 1; j <= H; ++j)
      cost[i][j] = std::min({cost[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1),
                             cost[i - 1][j] + 1, cost[i][j - 1] + 1});
  std::vector<EditOp> ops;
  size_t i = R, j = H;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = ref[i - 1] == hyp[j - 1];
      if (cost[i][j] == cost[i - 1][j - 1] + (same ? 0 : 1)) {
        ops.push_back(same ? EditOp::kMatch : EditOp::kSubstitute);
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      ops.push_back(EditOp::kDelete);
      --i;
    } else {
      ops.push_back(EditOp::kInsert);
      --j;
    }
  }
  std::reverse(ops.begin(), ops.end());
  return ops;
}

double WordErrorStats::Wer() const {
  return ref_words == 0 ? 0.0 : static_cast<double>(Errors()) / ref_words;
}

double WordErrorStats::RareWer() const {
  return rare_ref_words == 0 ? 0.0
                             : static_cast<double>(rare_errors) / rare_ref_words;
}

void WordErrorStats::Add(const WordErrorStats &o) {
  ref_words += o.ref_words;
  substitutions += o.substitutions;
  deletions += o.deletions;
  insertions += o.insertions;
  rare_ref_words += o.rare_ref_words;
  rare_errors += o.rare_errors;
}

WordErrorStats ScoreUtterance(const std::vector<std::string> &hyp,
                              const std::vector<std::string> &ref,
                              const std::set<std::string> &rare_words) {
  WordErrorStats s;
  s.ref_words = static_cast<int64_t>(ref.size());
  size_t r = 0;
  for (EditOp op : AlignWords(hyp, ref)) {
    if (op == EditOp::kInsert) {
      ++s.insertions;
      continue;
    }
    const bool rare = rare_words.count(ref[r]) != 0;
    if (rare) ++s.rare_ref_words;
    if (op == EditOp::kSubstitute) ++s.substitutions;
    if (op == EditOp::kDelete) ++s.deletions;
    if (rare && op != EditOp::kMatch) ++s.rare_errors;
    ++r;
  }
  return s;
}

WordErrorStats ScoreCorpus(const std::vector<std::vector<std::string>> &hyps,
                           const std::vector<std::vector<std::string>> &refs,
                           const std::set<std::string> &rare_words) {
  if (refs.empty()) throw InvalidInput("ScoreCorpus: empty split");
  if (hyps.size() != refs.size())
    throw InvalidInput("ScoreCorpus: " + std::to_string(hyps.size()) +
                       " hypotheses for " + std::to_string(refs.size()) +
                       " references");
  WordErrorStats total;
  for (size_t i = 0; i < refs.size(); ++i)
    total.Add(ScoreUtterance(hyps[i], refs[i], rare_words));
  return total;
}

}  // namespace ftilm
