// include/ftilm/harness/metrics.h


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

#ifndef FTILM_HARNESS_METRICS_H_
#define FTILM_HARNESS_METRICS_H_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

namespace ftilm {

enum class EditOp { kMatch, kSubstitute, kDelete, kInsert };

// Minimum-cost edit script turning ref into hyp.  Ties in the backtrace
// prefer the diagonal (match or substitution), then deletion, then
// insertion, so the script is unique.
std::vector<EditOp> AlignWords(const std::vector<std::string> &hyp,
                               const std::vector<std::string> &ref);

struct WordErrorStats {
  int64_t ref_words = 0;
  int64_t substitutions = 0;
  int64_t deletions = 0;
  int64_t insertions = 0;
  int64_t rare_ref_words = 0;
  int64_t rare_errors = 0;   // rare reference words substituted or deleted

  int64_t Errors() const { return substitutions + deletions + insertions; }
  // 0 when there is nothing to score.
  double Wer() const;
  double RareWer() const;
  void Add(const WordErrorStats &other);
};

// Insertions count towards WER but belong to no reference word, so they
// never count as rare-word errors.
WordErrorStats ScoreUtterance(const std::vector<std::string> &hyp,
                              const std::vector<std::string> &ref,
                              const std::set<std::string> &rare_words);

// Totals over a split.  Throws InvalidInput for an empty split or a size
// mismatch.
WordErrorStats ScoreCorpus(const std::vector<std::vector<std::string>> &hyps,
                           const std::vector<std::vector<std::string>> &refs,
                           const std::set<std::string> &rare_words);

}  // namespace ftilm

#endif  // FTILM_HARNESS_METRICS_H_
