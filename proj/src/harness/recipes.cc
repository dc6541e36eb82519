// src/harness/recipes.cc


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

#include "ftilm/harness/recipes.h"

#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "ftilm/base/errors.h"
#include "ftilm/base/parallel.h"
#include "ftilm/base/rng.h"

namespace ftilm {

Adam::Adam(size_t num_params, double learning_rate, double beta1, double beta2,
           double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon),
      m_(num_params, 0.0), v_(num_params, 0.0) {
  if (learning_rate < 0.0) throw ConfigError("Adam: negative learning rate");
}

void Adam::Step(std::span<double> params, const std::vector<double> &grad) {
  if (params.size() != m_.size() || grad.size() != m_.size())
    throw InvalidInput("Adam::Step: size mismatch");
  ++step_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
  for (size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    params[i] -= lr_ * (m_[i] / c1) / (std::sqrt(v_[i] / c2) + eps_);
  }
}

std::vector<PreparedUtterance> Prepare(const std::vector<Utterance> &utts,
                                       const Vocabulary &vocab,
                                       const LmInterface &ilm) {
  std::vector<PreparedUtterance> out(utts.size());
  ParallelFor(utts.size(), [&](size_t i) {
    out[i].utt = &utts[i];
    out[i].tokens = vocab.Encode(utts[i].words);
    out[i].ilm_rows = IlmRows(ilm, out[i].tokens);
  });
  return out;
}

double UtteranceLoss(const ToyFTModel &model, const PreparedUtterance &prep,
                     const BandMask *mask, double scale,
                     std::vector<double> *grad) {
  EncoderOutput enc = model.Encode(*prep.utt);
  FTScores scores = model.Scores(enc, prep.tokens, prep.ilm_rows);
  LogProbLattice lattice = BuildTrainingLattice(scores, prep.tokens);
  LatticeGradients lg(lattice.NumFrames(), lattice.TargetLength());
  double loss = LossAndGradients(lattice, mask, &lg);
  if (grad != nullptr && std::isfinite(loss)) {
    lg.Scale(scale);
    FTScores d = BackpropLattice(scores, prep.tokens, 1.0, lg);
    model.Backward(enc, prep.tokens, d, grad);
  }
  return loss;
}

namespace {

// Sums per-item gradients in index order so the result does not depend on
// scheduling.
void ReduceInOrder(const std::vector<std::vector<double>> &parts,
                   std::vector<double> *total) {
  std::fill(total->begin(), total->end(), 0.0);
  for (const auto &p : parts)
    for (size_t i = 0; i < total->size(); ++i) (*total)[i] += p[i];
}

std::vector<size_t> SampleBatch(size_t n, int batch_size, Rng *rng) {
  std::vector<size_t> batch(batch_size);
  for (size_t &b : batch) b = static_cast<size_t>(rng->UniformInt(static_cast<int>(n)));
  return batch;
}

BandMask GoldBand(const PreparedUtterance &prep, const BandConfig &band) {
  return BandFromAlignment(prep.utt->alignment, band, prep.utt->num_frames);
}

}  // namespace

TrainResult TrainFt(ToyFTModel *model, const FrozenLm &ilm,
                    const std::vector<PreparedUtterance> &train,
                    const TrainConfig &config) {
  if (config.steps < 0 || config.batch_size < 1)
    throw ConfigError("TrainFt: steps must be >= 0 and batch_size >= 1");
  if (train.empty()) throw InvalidInput("TrainFt: empty training split");
  const uint64_t ilm_hash = ilm.ParamHash();
  const size_t P = model->ParamVector().size();
  Adam adam(P, config.learning_rate);
  Rng rng = Rng::Stream(config.seed, "ft-batch");
  TrainResult result;
  std::vector<double> grad(P);

  for (int step = 0; step < config.steps; ++step) {
    std::vector<size_t> batch = SampleBatch(train.size(), config.batch_size, &rng);
    std::vector<std::vector<double>> parts(batch.size());
    std::vector<double> losses(batch.size());
    const ToyFTModel &m = *model;
    const double scale = 1.0 / static_cast<double>(batch.size());
    ParallelFor(batch.size(), [&](size_t b) {
      const PreparedUtterance &prep = train[batch[b]];
      parts[b].assign(P, 0.0);
      std::unique_ptr<BandMask> mask;
      if (config.banded) mask = std::make_unique<BandMask>(GoldBand(prep, config.band));
      try {
        losses[b] = UtteranceLoss(m, prep, mask.get(), scale, &parts[b]);
      } catch (const InvalidInput &) {
        if (step == 0) throw;
        losses[b] = std::numeric_limits<double>::quiet_NaN();  // updated into garbage
      }
    });
    double loss = 0.0;
    for (double l : losses) loss += l * scale;
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "FT training diverged at step " << step << " (batch loss " << loss
          << ", learning rate " << config.learning_rate << ")";
      throw TrainingDiverged(msg.str());
    }
    result.loss_curve.push_back(loss);
    ReduceInOrder(parts, &grad);
    adam.Step(model->Params(), grad);
  }
  if (ilm.ParamHash() != ilm_hash)
    throw Error("TrainFt: frozen ILM parameters changed");
  return result;
}

std::vector<std::vector<Hypothesis>> DecodeUtterances(
    const ToyFTModel &model, const LmInterface &ilm,
    const std::vector<Utterance> &utts, const DecodeConfig &config) {
  std::vector<std::vector<Hypothesis>> out(utts.size());
  ParallelFor(utts.size(), [&](size_t i) {
    ModelScorer scorer(model, utts[i]);
    out[i] = BeamSearch(scorer, ilm, config);
  });
  return out;
}

EvalResult Evaluate(const ToyFTModel &model, const LmInterface &ilm,
                    const std::vector<Utterance> &utts, const Vocabulary &vocab,
                    const std::set<std::string> &rare_words,
                    const DecodeConfig &config) {
  if (utts.empty()) throw InvalidInput("Evaluate: empty split");
  auto nbest = DecodeUtterances(model, ilm, utts, config);
  EvalResult result;
  std::vector<std::vector<std::string>> refs;
  for (size_t i = 0; i < utts.size(); ++i) {
    result.hyps.push_back(nbest[i].empty() ? std::vector<std::string>{}
                                           : vocab.Decode(nbest[i][0].tokens));
    refs.push_back(utts[i].words);
  }
  result.stats = ScoreCorpus(result.hyps, refs, rare_words);
  return result;
}

SweepResult Sweep(const ToyFTModel &model, const LmInterface &ilm,
                  const std::vector<Utterance> &utts, const Vocabulary &vocab,
                  const std::set<std::string> &rare_words,
                  const std::vector<double> &alphas,
                  const std::vector<double> &betas, const DecodeConfig &base) {
  if (alphas.empty() || betas.empty()) throw ConfigError("Sweep: empty grid");
  SweepResult result;
  for (double a : alphas)
    for (double b : betas) {
      DecodeConfig cfg = base;
      cfg.weights = FusionWeights{a, b};
      SweepCell cell;
      cell.alpha = a;
      cell.beta = b;
      cell.stats = Evaluate(model, ilm, utts, vocab, rare_words, cfg).stats;
      result.cells.push_back(cell);
    }
  for (size_t i = 1; i < result.cells.size(); ++i) {
    const auto &c = result.cells[i].stats, &best = result.cells[result.best].stats;
    if (c.Wer() < best.Wer() ||
        (c.Wer() == best.Wer() && c.RareWer() < best.RareWer()))
      result.best = i;
  }
  return result;
}

namespace {

struct MwerUtteranceResult {
  bool empty = false;
  double mwer = 0.0;
  double rnnt = 0.0;
};

// Combined loss of one utterance; gradient (times scale) added into *grad.
MwerUtteranceResult MwerUtterance(const ToyFTModel &model, const FrozenLm &ilm,
                                  const PreparedUtterance &prep,
                                  const Vocabulary &vocab,
                                  const MwerConfig &config, double scale,
                                  std::vector<double> *grad) {
  MwerUtteranceResult out;
  const double alpha = config.decode.weights.alpha;
  const double beta = config.decode.weights.beta;
  ModelScorer scorer(model, *prep.utt);
  std::vector<Hypothesis> nbest = BeamSearch(scorer, ilm, config.decode);
  if (nbest.empty()) {
    out.empty = true;
    return out;
  }
  EncoderOutput enc = model.Encode(*prep.utt);
  const int T = enc.num_frames;

  struct Scored {
    FTScores scores;
    LatticeGradients grads;
  };
  std::vector<Scored> scored;
  std::vector<NBestItem> items;
  for (const Hypothesis &h : nbest) {
    auto rows = IlmRows(ilm, h.tokens);
    FTScores s = model.Scores(enc, h.tokens, rows);
    LogProbLattice lat = BuildLattice(s, h.tokens, alpha);
    BandMask mask = BandFromAlignment(h.viterbi_alignment, config.band, T);
    LatticeGradients g(T, static_cast<int>(h.tokens.size()));
    NBestItem item;
    item.tokens = h.tokens;
    item.full_sum_logprob = -LossAndGradients(lat, &mask, &g);
    item.ilm_logprob_sum = h.ilm_logprob_sum;
    item.word_errors = WordEditDistance(vocab.Decode(h.tokens), prep.utt->words);
    items.push_back(item);
    scored.push_back({std::move(s), std::move(g)});
  }
  out.mwer = MwerLoss(items, beta);
  std::vector<double> d_logprob = MwerGradients(items, beta);
  for (size_t i = 0; i < items.size(); ++i) {
    if (d_logprob[i] == 0.0) continue;
    // full_sum_logprob = -loss, so d mwer / d loss_i = -d_logprob[i]
    scored[i].grads.Scale(-d_logprob[i] * scale);
    FTScores d = BackpropLattice(scored[i].scores, items[i].tokens, alpha,
                                 scored[i].grads);
    model.Backward(enc, items[i].tokens, d, grad);
  }
  if (config.lambda_rnnt > 0.0) {
    BandMask gold = BandFromAlignment(prep.utt->alignment, config.band, T);
    out.rnnt = UtteranceLoss(model, prep, &gold, config.lambda_rnnt * scale, grad);
  }
  return out;
}

}  // namespace

MwerResult MwerFinetune(ToyFTModel *model, const FrozenLm &ilm,
                        const std::vector<PreparedUtterance> &train,
                        const Vocabulary &vocab, const MwerConfig &config) {
  if (config.steps < 0 || config.batch_size < 1)
    throw ConfigError("MwerFinetune: steps must be >= 0 and batch_size >= 1");
  if (config.lambda_rnnt < 0.0) throw ConfigError("MwerFinetune: lambda_rnnt < 0");
  if (train.empty()) throw InvalidInput("MwerFinetune: empty training split");
  config.decode.Check();
  const uint64_t ilm_hash = ilm.ParamHash();
  const size_t P = model->ParamVector().size();
  Adam adam(P, config.learning_rate);
  Rng rng = Rng::Stream(config.seed, "mwer-batch");
  MwerResult result;
  std::vector<double> grad(P);

  for (int step = 0; step < config.steps; ++step) {
    std::vector<size_t> batch = SampleBatch(train.size(), config.batch_size, &rng);
    std::vector<std::vector<double>> parts(batch.size());
    std::vector<MwerUtteranceResult> res(batch.size());
    const ToyFTModel &m = *model;
    const double scale = 1.0 / static_cast<double>(batch.size());
    ParallelFor(batch.size(), [&](size_t b) {
      parts[b].assign(P, 0.0);
      try {
        res[b] = MwerUtterance(m, ilm, train[batch[b]], vocab, config, scale, &parts[b]);
      } catch (const InvalidInput &) {
        if (step == 0) throw;
        res[b].mwer = std::numeric_limits<double>::quiet_NaN();
      }
    });
    double mwer = 0.0, rnnt = 0.0;
    int used = 0;
    for (const auto &r : res) {
      if (r.empty) {
        ++result.empty_nbest;
        continue;
      }
      mwer += r.mwer;
      rnnt += r.rnnt;
      ++used;
    }
    if (used == 0) {
      ++result.skipped_batches;
      continue;
    }
    mwer /= used;
    rnnt /= used;
    const double loss = CombinedLoss(mwer, rnnt, config.lambda_rnnt);
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "MWER finetuning diverged at step " << step << " (loss " << loss << ")";
      throw TrainingDiverged(msg.str());
    }
    result.loss_curve.push_back(loss);
    result.mwer_curve.push_back(mwer);
    ReduceInOrder(parts, &grad);
    // utterances were scaled by 1 / batch size; average over the used ones
    if (used < static_cast<int>(batch.size()))
      for (double &g : grad) g *= static_cast<double>(batch.size()) / used;
    adam.Step(model->Params(), grad);
  }
  if (ilm.ParamHash() != ilm_hash)
    throw Error("MwerFinetune: frozen ILM parameters changed");
  return result;
}

}  // namespace ftilm
