// src/mwer/mwer.cc

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

#include "ftilm/mwer/mwer.h"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ftilm/base/errors.h"
#include "ftilm/base/log-math.h"

namespace ftilm {

int WordEditDistance(const std::vector<std::string> &hyp,
                     const std::vector<std::string> &ref) {
  return WordEditDistance<std::string>(hyp, ref);
}

std::vector<double> NBestPosteriors(std::span<const NBestItem> nbest,
                                    double beta) {
  if (nbest.empty()) throw DegenerateInput("MWER: empty N-best list");
  std::vector<double> scores(nbest.size());
  for (size_t i = 0; i < nbest.size(); ++i)
    scores[i] = nbest[i].full_sum_logprob + beta * nbest[i].ilm_logprob_sum;
  double norm = LogSumExp(scores);
  if (norm == kLogZero || std::isnan(norm))
    throw DegenerateInput("MWER: every hypothesis score is -inf");
  for (double &s : scores) s = std::exp(s - norm);
  return scores;
}

double MwerLoss(std::span<const NBestItem> nbest, double beta) {
  std::vector<double> post = NBestPosteriors(nbest, beta);
  double loss = 0.0;
  for (size_t i = 0; i < nbest.size(); ++i)
    loss += post[i] * nbest[i].word_errors;
  return loss;
}

std::vector<double> MwerGradients(std::span<const NBestItem> nbest,
                                  double beta) {
  std::vector<double> post = NBestPosteriors(nbest, beta);
  double expected = 0.0;
  for (size_t i = 0; i < nbest.size(); ++i)
    expected += post[i] * nbest[i].word_errors;
  std::vector<double> grad(nbest.size());
  for (size_t i = 0; i < nbest.size(); ++i)
    grad[i] = post[i] * (nbest[i].word_errors - expected);
  return grad;
}

BandMask BandFromAlignment(std::span<const int> alignment,
                           const BandConfig &config, int num_frames) {
  const int T = num_frames, U = static_cast<int>(alignment.size());
  if (T <= 0) throw InvalidInput("BandFromAlignment: no frames");
  if (config.left_context < 0 || config.right_context < 0)
    throw InvalidInput("BandFromAlignment: negative context");
  for (int u = 0; u < U; ++u) {
    if (alignment[u] < 0 || alignment[u] >= T ||
        (u > 0 && alignment[u] < alignment[u - 1])) {
      std::ostringstream msg;
      msg << "BandFromAlignment: alignment must be non-decreasing in [0, " << T
          << "); token " << u << " at frame " << alignment[u];
      throw InvalidInput(msg.str());
    }
  }
  BandMask mask(T, U);
  for (int u = 0; u <= U; ++u) {
    // row u is entered at a_u (label u) and left at a_{u+1} (label u+1)
    int enter = u == 0 ? 0 : alignment[u - 1];
    int leave = u == U ? T - 1 : alignment[u];
    int lo = std::max(0, enter - config.left_context);
    int hi = std::min(T - 1, leave + config.right_context);
    for (int t = lo; t <= hi; ++t) mask.SetValid(t, u, true);
  }
  mask.Prune();
  return mask;
}

}  // namespace ftilm
