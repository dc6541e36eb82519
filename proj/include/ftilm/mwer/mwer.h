// include/ftilm/mwer/mwer.h

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

#ifndef FTILM_MWER_MWER_H_
#define FTILM_MWER_MWER_H_

#include <algorithm>
#include <span>
#include <string>
#include <vector>

#include "ftilm/lattice/transducer-lattice.h"

namespace ftilm {

// One N-best entry as seen by the expected-word-error loss.
struct NBestItem {
  std::vector<int> tokens;
  double full_sum_logprob = 0.0;  // log P(y_i | x), possibly band-restricted
  double ilm_logprob_sum = 0.0;   // sum_u log P_ilm(y_u | y_<u)
  int word_errors = 0;            // Levenshtein distance to the reference
};

struct BandConfig {
  int left_context = 15;   // frames
  int right_context = 15;  // frames
};

// Levenshtein distance with unit substitution, insertion and deletion costs.
template <typename T>
int WordEditDistance(std::span<const T> hyp, std::span<const T> ref) {
  std::vector<int> prev(ref.size() + 1), cur(ref.size() + 1);
  for (size_t j = 0; j <= ref.size(); ++j) prev[j] = static_cast<int>(j);
  for (size_t i = 1; i <= hyp.size(); ++i) {
    cur[0] = static_cast<int>(i);
    for (size_t j = 1; j <= ref.size(); ++j) {
      int sub = prev[j - 1] + (hyp[i - 1] == ref[j - 1] ? 0 : 1);
      cur[j] = std::min({sub, prev[j] + 1, cur[j - 1] + 1});
    }
    std::swap(prev, cur);
  }
  return prev[ref.size()];
}

int WordEditDistance(const std::vector<std::string> &hyp,
                     const std::vector<std::string> &ref);

// Softmax over the N-best of full_sum_logprob + beta * ilm_logprob_sum.
// Throws DegenerateInput if the list is empty or every score is -inf.
std::vector<double> NBestPosteriors(std::span<const NBestItem> nbest,
                                    double beta);

// Expected word errors sum_i P_i R_i under NBestPosteriors.
double MwerLoss(std::span<const NBestItem> nbest, double beta);

// d MwerLoss / d full_sum_logprob_i = P_i (R_i - MwerLoss).
std::vector<double> MwerGradients(std::span<const NBestItem> nbest,
                                  double beta);

// Band around a token alignment (emission frame of each token).  Node (t, u)
// is kept iff
//   a_u - C_l <= t <= a_{u+1} + C_r     (a_0 = 0, a_{U+1} = T - 1)
// clamped to [0, T), then nodes on no complete path are pruned.  A label
// from row u can therefore only be emitted within [a_{u+1} - C_l,
// a_{u+1} + C_r], and the alignment itself is always inside the band.
// Throws InvalidInput for a decreasing or out-of-range alignment.
BandMask BandFromAlignment(std::span<const int> alignment,
                           const BandConfig &config, int num_frames);

inline double CombinedLoss(double mwer, double rnnt, double lambda_rnnt) {
  return mwer + lambda_rnnt * rnnt;
}

}  // namespace ftilm

#endif  // FTILM_MWER_MWER_H_
