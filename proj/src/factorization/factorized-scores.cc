// src/factorization/factorized-scores.cc

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

#include "ftilm/factorization/factorized-scores.h"

#include <cmath>
#include <sstream>

#include "ftilm/base/errors.h"
#include "ftilm/base/log-math.h"

namespace ftilm {

void FusionWeights::Check() const {
  if (!(alpha >= 0.0 && alpha <= 2.0)) {
    std::ostringstream msg;
    msg << "FusionWeights: alpha " << alpha << " outside [0, 2]";
    throw InvalidInput(msg.str());
  }
  if (!(beta >= 0.0) || std::isinf(beta)) {
    std::ostringstream msg;
    msg << "FusionWeights: beta " << beta << " must be finite and >= 0";
    throw InvalidInput(msg.str());
  }
}

FTScores::FTScores(int num_frames, int num_histories, int vocab_size)
    : num_frames_(num_frames),
      num_histories_(num_histories),
      vocab_size_(vocab_size) {
  if (num_frames < 0 || num_histories < 1 || vocab_size < 1)
    throw InvalidInput("FTScores: need T >= 0, histories >= 1, V >= 1");
  am_.assign(static_cast<size_t>(num_frames) * vocab_size, 0.0);
  ilm_.assign(static_cast<size_t>(num_histories) * vocab_size, 0.0);
  blank_.assign(static_cast<size_t>(num_frames) * num_histories, 0.0);
}

void FTScores::Check() const {
  for (const auto *v : {&am_, &ilm_, &blank_})
    for (double x : *v)
      if (!std::isfinite(x)) throw InvalidInput("FTScores: non-finite entry");
}

BlankLogProbs BlankLogProb(double blank_logit) {
  // log sigmoid(x) = -softplus(-x), log(1 - sigmoid(x)) = -softplus(x)
  return {-Softplus(-blank_logit), -Softplus(blank_logit)};
}

namespace {

void CheckShapes(std::span<const double> am, std::span<const double> ilm) {
  if (am.size() != ilm.size() || am.empty()) {
    std::ostringstream msg;
    msg << "non-blank scores: acoustic size " << am.size()
        << " vs ILM size " << ilm.size();
    throw InvalidInput(msg.str());
  }
}

// log(1 - P_b) + logsoftmax(log_am + alpha * log_ilm) + beta * log_ilm, with
// log_am and log_ilm already normalized.
void FusedScores(std::span<const double> log_am,
                 std::span<const double> log_ilm, double log_non_blank,
                 const FusionWeights &w, std::span<double> out) {
  const size_t V = log_am.size();
  for (size_t k = 0; k < V; ++k) out[k] = log_am[k] + w.alpha * log_ilm[k];
  LogSoftmax(out, out);
  for (size_t k = 0; k < V; ++k) out[k] += log_non_blank;
  if (w.beta != 0.0)
    for (size_t k = 0; k < V; ++k) out[k] += w.beta * log_ilm[k];
}

}  // namespace

std::vector<double> NonBlankDecodeScores(std::span<const double> am,
                                         std::span<const double> ilm,
                                         double blank_logit,
                                         const FusionWeights &weights) {
  CheckShapes(am, ilm);
  std::vector<double> log_am = LogSoftmax(am), log_ilm = LogSoftmax(ilm);
  std::vector<double> out(am.size());
  FusedScores(log_am, log_ilm, BlankLogProb(blank_logit).non_blank, weights,
              out);
  return out;
}

std::vector<double> NonBlankTrainLogProbs(std::span<const double> am,
                                          std::span<const double> ilm,
                                          double blank_logit) {
  return NonBlankDecodeScores(am, ilm, blank_logit, FusionWeights::Training());
}

double NonBlankDecodeScore(std::span<const double> am,
                           std::span<const double> ilm, double blank_logit,
                           const FusionWeights &weights, int token) {
  if (token < 0 || static_cast<size_t>(token) >= am.size())
    throw InvalidInput("NonBlankDecodeScore: token id out of range");
  return NonBlankDecodeScores(am, ilm, blank_logit, weights)[token];
}

namespace {

void CheckTarget(const FTScores &scores, std::span<const int> target) {
  if (static_cast<int>(target.size()) != scores.NumHistories() - 1) {
    std::ostringstream msg;
    msg << "target length " << target.size() << " does not match "
        << scores.NumHistories() << " ILM histories";
    throw InvalidInput(msg.str());
  }
  for (int k : target) {
    if (k < 0 || k >= scores.VocabSize()) {
      std::ostringstream msg;
      msg << "target id " << k << " outside vocabulary of size "
          << scores.VocabSize();
      throw InvalidInput(msg.str());
    }
  }
}

}  // namespace

LogProbLattice BuildLattice(const FTScores &scores, std::span<const int> target,
                            double alpha) {
  CheckTarget(scores, target);
  const int T = scores.NumFrames(), U = static_cast<int>(target.size());
  const int V = scores.VocabSize();
  const FusionWeights weights{alpha, 0.0};

  std::vector<std::vector<double>> log_am(T), log_ilm(U + 1);
  for (int t = 0; t < T; ++t) log_am[t] = LogSoftmax(scores.AmLogits(t));
  for (int u = 0; u <= U; ++u) log_ilm[u] = LogSoftmax(scores.IlmLogits(u));

  LogProbLattice lattice(T, U);
  std::vector<double> cell(V);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      BlankLogProbs b = BlankLogProb(scores.BlankLogit(t, u));
      lattice.Blank(t, u) = b.blank;
      if (u == U) continue;
      FusedScores(log_am[t], log_ilm[u], b.non_blank, weights, cell);
      lattice.Label(t, u) = cell[target[u]];
    }
  }
  return lattice;
}

LogProbLattice BuildTrainingLattice(const FTScores &scores,
                                    std::span<const int> target) {
  return BuildLattice(scores, target, 1.0);
}

FTScores BackpropLattice(const FTScores &scores, std::span<const int> target,
                         double alpha, const LatticeGradients &grads) {
  CheckTarget(scores, target);
  const int T = scores.NumFrames(), U = static_cast<int>(target.size());
  const int V = scores.VocabSize();
  if (grads.NumFrames() != T || grads.TargetLength() != U)
    throw InvalidInput("BackpropLattice: gradient shape mismatch");

  std::vector<std::vector<double>> log_am(T), log_ilm(U + 1);
  for (int t = 0; t < T; ++t) log_am[t] = LogSoftmax(scores.AmLogits(t));
  for (int u = 0; u <= U; ++u) log_ilm[u] = LogSoftmax(scores.IlmLogits(u));

  // Gradients w.r.t. the normalized log P_am / log P_ilm first.
  FTScores d(T, U + 1, V);
  std::vector<double> d_log_am(static_cast<size_t>(T) * V, 0.0);
  std::vector<double> d_log_ilm(static_cast<size_t>(U + 1) * V, 0.0);
  std::vector<double> z(V);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      const double p_blank = Sigmoid(scores.BlankLogit(t, u));
      const double g_blank = grads.Blank(t, u);
      const double g_label = u < U ? grads.Label(t, u) : 0.0;
      // d log sigmoid(x) = 1 - p,  d log(1 - sigmoid(x)) = -p
      d.BlankLogit(t, u) = g_blank * (1.0 - p_blank) - g_label * p_blank;
      if (u == U || g_label == 0.0) continue;
      for (int k = 0; k < V; ++k) z[k] = log_am[t][k] + alpha * log_ilm[u][k];
      LogSoftmax(z, z);
      const int y = target[u];
      for (int k = 0; k < V; ++k) {
        double dz = g_label * ((k == y ? 1.0 : 0.0) - std::exp(z[k]));
        d_log_am[static_cast<size_t>(t) * V + k] += dz;
        d_log_ilm[static_cast<size_t>(u) * V + k] += alpha * dz;
      }
    }
  }

  // Through the two LogSoftmax layers.
  auto through_log_softmax = [V](std::span<const double> log_p,
                                 const double *d_log_p, std::span<double> out) {
    double sum = 0.0;
    for (int k = 0; k < V; ++k) sum += d_log_p[k];
    for (int k = 0; k < V; ++k) out[k] = d_log_p[k] - std::exp(log_p[k]) * sum;
  };
  for (int t = 0; t < T; ++t)
    through_log_softmax(log_am[t], &d_log_am[static_cast<size_t>(t) * V],
                        d.AmLogits(t));
  for (int u = 0; u <= U; ++u)
    through_log_softmax(log_ilm[u], &d_log_ilm[static_cast<size_t>(u) * V],
                        d.IlmLogits(u));
  return d;
}

}  // namespace ftilm
