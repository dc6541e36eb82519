// include/ftilm/factorization/factorized-scores.h

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

#ifndef FTILM_FACTORIZATION_FACTORIZED_SCORES_H_
#define FTILM_FACTORIZATION_FACTORIZED_SCORES_H_

#include <span>
#include <vector>

#include "ftilm/lattice/transducer-lattice.h"

namespace ftilm {

// Weights of the ILM inside (alpha) and outside (beta) the non-blank softmax.
// Training always uses alpha = 1, beta = 0.
struct FusionWeights {
  double alpha = 1.0;
  double beta = 0.0;

  static FusionWeights Training() { return FusionWeights{1.0, 0.0}; }
  bool IsTraining() const { return alpha == 1.0 && beta == 0.0; }
  // alpha in [0, 2], beta >= 0; throws InvalidInput otherwise.
  void Check() const;
};

/*
  Factorized score tensors for one utterance along one label history:

    AmLogits(t)      [V]   acoustic projection of the encoder at frame t
    IlmLogits(u)     [V]   non-blank predictor output after u tokens
    BlankLogit(t,u)        blank joiner output at frame t, history u

  The acoustic part depends only on t and the ILM part only on u.  The blank
  logit is stored per cell because the blank joiner mixes encoder and
  blank-predictor states before its nonlinearity.
*/
class FTScores {
 public:
  FTScores() = default;
  // Zero-filled.
  FTScores(int num_frames, int num_histories, int vocab_size);

  int NumFrames() const { return num_frames_; }
  int NumHistories() const { return num_histories_; }
  int VocabSize() const { return vocab_size_; }

  std::span<double> AmLogits(int t) {
    return {am_.data() + static_cast<size_t>(t) * vocab_size_,
            static_cast<size_t>(vocab_size_)};
  }
  std::span<const double> AmLogits(int t) const {
    return {am_.data() + static_cast<size_t>(t) * vocab_size_,
            static_cast<size_t>(vocab_size_)};
  }
  std::span<double> IlmLogits(int u) {
    return {ilm_.data() + static_cast<size_t>(u) * vocab_size_,
            static_cast<size_t>(vocab_size_)};
  }
  std::span<const double> IlmLogits(int u) const {
    return {ilm_.data() + static_cast<size_t>(u) * vocab_size_,
            static_cast<size_t>(vocab_size_)};
  }
  double &BlankLogit(int t, int u) { return blank_[t * num_histories_ + u]; }
  double BlankLogit(int t, int u) const {
    return blank_[t * num_histories_ + u];
  }

  // Throws InvalidInput if any entry is not finite.
  void Check() const;

 private:
  int num_frames_ = 0;
  int num_histories_ = 0;
  int vocab_size_ = 0;
  std::vector<double> am_;
  std::vector<double> ilm_;
  std::vector<double> blank_;
};

struct BlankLogProbs {
  double blank;      // log P_b
  double non_blank;  // log(1 - P_b)
};

// Log-sigmoid pair of the blank logit, stable for large |logit|.
BlankLogProbs BlankLogProb(double blank_logit);

// Training-time non-blank log-probabilities over the vocabulary:
//   log(1 - P_b) + logsoftmax(logsoftmax(am) + logsoftmax(ilm)).
// Their logsumexp equals log(1 - P_b).
std::vector<double> NonBlankTrainLogProbs(std::span<const double> am,
                                          std::span<const double> ilm,
                                          double blank_logit);

// Decode-time non-blank scores with ILM fusion:
//   log(1 - P_b) + logsoftmax(log P_am + alpha * log P_ilm)[k]
//     + beta * log P_ilm[k]
// These rank hypotheses; with beta > 0 they are not a distribution.  With
// alpha = 1, beta = 0 this is the code path NonBlankTrainLogProbs uses.
std::vector<double> NonBlankDecodeScores(std::span<const double> am,
                                         std::span<const double> ilm,
                                         double blank_logit,
                                         const FusionWeights &weights);

double NonBlankDecodeScore(std::span<const double> am,
                           std::span<const double> ilm, double blank_logit,
                           const FusionWeights &weights, int token);

// Lattice of the target under the training normalization (alpha = 1).
// Requires target.size() == NumHistories() - 1 and ids < V.
LogProbLattice BuildTrainingLattice(const FTScores &scores,
                                    std::span<const int> target);

// Same with alpha scaling the ILM inside the non-blank softmax.  beta never
// enters the lattice; callers add beta * sum log P_ilm themselves.
LogProbLattice BuildLattice(const FTScores &scores, std::span<const int> target,
                            double alpha);

// Chains lattice-entry gradients back to the logits.  The result has the
// shape of `scores` and holds d loss / d entry.
FTScores BackpropLattice(const FTScores &scores, std::span<const int> target,
                         double alpha, const LatticeGradients &grads);

}  // namespace ftilm

#endif  // FTILM_FACTORIZATION_FACTORIZED_SCORES_H_
