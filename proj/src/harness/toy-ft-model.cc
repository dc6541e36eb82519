// src/harness/toy-ft-model.cc


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

#include "ftilm/harness/toy-ft-model.h"

#include <algorithm>
#include <cmath>

#include "ftilm/base/errors.h"
#include "ftilm/base/rng.h"

namespace ftilm {

void FtModelConfig::Check() const {
  if (vocab_size < 1 || feature_dim < 1 || context < 0 || hidden_dim < 1 ||
      joint_dim < 1 || blank_embedding_dim < 1)
    throw ConfigError("FtModelConfig: dimensions must be positive");
  if (!(init_scale > 0.0)) throw ConfigError("FtModelConfig: init_scale must be > 0");
}

ToyFTModel::Offsets ToyFTModel::ComputeOffsets(const FtModelConfig &c) {
  const size_t V = c.vocab_size, W = c.WindowDim(), H = c.hidden_dim,
               J = c.joint_dim, E = c.blank_embedding_dim;
  Offsets o{};
  o.w1 = 0;
  o.b1 = o.w1 + H * W;
  o.w_am = o.b1 + H;
  o.b_am = o.w_am + V * H;
  o.a = o.b_am + V;
  o.emb = o.a + J * H;
  o.l = o.emb + V * E;
  o.b_j = o.l + J * E;
  o.v = o.b_j + J;
  o.c = o.v + J;
  o.total = o.c + 1;
  return o;
}

int64_t ToyFTModel::NumParams(const FtModelConfig &config) {
  return static_cast<int64_t>(ComputeOffsets(config).total);
}

ToyFTModel::ToyFTModel(const FtModelConfig &config, uint64_t seed)
    : config_(config) {
  config_.Check();
  off_ = ComputeOffsets(config_);
  params_.assign(off_.total, 0.0);
  Rng rng = Rng::Stream(seed, "ft-init");
  auto fill = [&](size_t begin, size_t end) {
    for (size_t i = begin; i < end; ++i) params_[i] = rng.Normal(0.0, config_.init_scale);
  };
  fill(off_.w1, off_.b1);
  fill(off_.w_am, off_.b_am);
  fill(off_.a, off_.b_j);   // A, embeddings, L
  fill(off_.v, off_.c);
}

EncoderOutput ToyFTModel::Encode(const Utterance &utt) const {
  if (utt.feature_dim != config_.feature_dim)
    throw InvalidInput("ToyFTModel: utterance " + utt.id + " has feature dim " +
                       std::to_string(utt.feature_dim) + ", model expects " +
                       std::to_string(config_.feature_dim));
  const int T = utt.num_frames, F = config_.feature_dim, W = config_.WindowDim(),
            H = config_.hidden_dim, V = config_.vocab_size, J = config_.joint_dim,
            C = config_.context;
  EncoderOutput enc;
  enc.num_frames = T;
  enc.input.assign(static_cast<size_t>(T) * W, 0.0);
  enc.hidden.resize(static_cast<size_t>(T) * H);
  enc.am.resize(static_cast<size_t>(T) * V);
  enc.proj.resize(static_cast<size_t>(T) * J);
  for (int t = 0; t < T; ++t) {
    double *x = &enc.input[static_cast<size_t>(t) * W];
    for (int k = -C; k <= C; ++k) {
      int s = t + k;
      if (s < 0 || s >= T) continue;
      std::copy(utt.Frame(s), utt.Frame(s) + F, x + (k + C) * F);
    }
    double *h = &enc.hidden[static_cast<size_t>(t) * H];
    for (int i = 0; i < H; ++i) {
      const double *w = &params_[off_.w1 + i * W];
      double acc = params_[off_.b1 + i];
      for (int j = 0; j < W; ++j) acc += w[j] * x[j];
      h[i] = std::tanh(acc);
    }
    double *am = &enc.am[static_cast<size_t>(t) * V];
    for (int v = 0; v < V; ++v) {
      const double *w = &params_[off_.w_am + v * H];
      double acc = params_[off_.b_am + v];
      for (int i = 0; i < H; ++i) acc += w[i] * h[i];
      am[v] = acc;
    }
    double *p = &enc.proj[static_cast<size_t>(t) * J];
    for (int j = 0; j < J; ++j) {
      const double *w = &params_[off_.a + j * H];
      double acc = 0.0;
      for (int i = 0; i < H; ++i) acc += w[i] * h[i];
      p[j] = acc;
    }
  }
  return enc;
}

std::vector<double> ToyFTModel::HistoryProjections() const {
  const int V = config_.vocab_size, J = config_.joint_dim,
            E = config_.blank_embedding_dim;
  std::vector<double> out(static_cast<size_t>(V) * J);
  for (int k = 0; k < V; ++k) {
    const double *e = &params_[off_.emb + k * E];
    for (int j = 0; j < J; ++j) {
      const double *w = &params_[off_.l + j * E];
      double acc = params_[off_.b_j + j];
      for (int i = 0; i < E; ++i) acc += w[i] * e[i];
      out[static_cast<size_t>(k) * J + j] = acc;
    }
  }
  return out;
}

double ToyFTModel::BlankLogit(const EncoderOutput &enc, int t,
                              std::span<const double> history_proj) const {
  const int J = config_.joint_dim;
  const double *p = &enc.proj[static_cast<size_t>(t) * J];
  double acc = params_[off_.c];
  for (int j = 0; j < J; ++j)
    acc += params_[off_.v + j] * std::tanh(p[j] + history_proj[j]);
  return acc;
}

FTScores ToyFTModel::Scores(const EncoderOutput &enc, std::span<const int> target,
                            const std::vector<std::vector<double>> &ilm_rows) const {
  const int T = enc.num_frames, U = static_cast<int>(target.size()),
            V = config_.vocab_size, J = config_.joint_dim;
  if (static_cast<int>(ilm_rows.size()) != U + 1)
    throw InvalidInput("ToyFTModel::Scores: need one ILM row per history");
  FTScores s(T, U + 1, V);
  for (int t = 0; t < T; ++t)
    std::copy_n(&enc.am[static_cast<size_t>(t) * V], V, s.AmLogits(t).begin());
  const std::vector<double> hist = HistoryProjections();
  for (int u = 0; u <= U; ++u) {
    if (static_cast<int>(ilm_rows[u].size()) != V)
      throw InvalidInput("ToyFTModel::Scores: ILM row has wrong size");
    std::copy(ilm_rows[u].begin(), ilm_rows[u].end(), s.IlmLogits(u).begin());
    const int last = u == 0 ? Vocabulary::kEos : target[u - 1];
    if (last < 0 || last >= V) throw InvalidInput("ToyFTModel::Scores: token out of range");
    std::span<const double> hp(&hist[static_cast<size_t>(last) * J], J);
    for (int t = 0; t < T; ++t) s.BlankLogit(t, u) = BlankLogit(enc, t, hp);
  }
  return s;
}

void ToyFTModel::Backward(const EncoderOutput &enc, std::span<const int> target,
                          const FTScores &d, std::vector<double> *grad) const {
  const int T = enc.num_frames, U = static_cast<int>(target.size()),
            V = config_.vocab_size, W = config_.WindowDim(), H = config_.hidden_dim,
            J = config_.joint_dim, E = config_.blank_embedding_dim;
  if (grad->size() != params_.size())
    throw InvalidInput("ToyFTModel::Backward: gradient buffer has wrong size");
  double *g = grad->data();
  const std::vector<double> hist = HistoryProjections();
  std::vector<double> d_hidden(H), d_proj(J), z(J);
  std::vector<double> d_hist(static_cast<size_t>(V) * J, 0.0);

  for (int t = 0; t < T; ++t) {
    const double *h = &enc.hidden[static_cast<size_t>(t) * H];
    const double *p = &enc.proj[static_cast<size_t>(t) * J];
    std::fill(d_hidden.begin(), d_hidden.end(), 0.0);
    std::fill(d_proj.begin(), d_proj.end(), 0.0);

    std::span<const double> d_am = d.AmLogits(t);
    for (int v = 0; v < V; ++v) {
      const double dv = d_am[v];
      if (dv == 0.0) continue;
      g[off_.b_am + v] += dv;
      double *gw = g + off_.w_am + v * H;
      const double *w = &params_[off_.w_am + v * H];
      for (int i = 0; i < H; ++i) {
        gw[i] += dv * h[i];
        d_hidden[i] += dv * w[i];
      }
    }

    for (int u = 0; u <= U; ++u) {
      const double gb = d.BlankLogit(t, u);
      if (gb == 0.0) continue;
      const int last = u == 0 ? Vocabulary::kEos : target[u - 1];
      const double *hp = &hist[static_cast<size_t>(last) * J];
      g[off_.c] += gb;
      for (int j = 0; j < J; ++j) {
        z[j] = std::tanh(p[j] + hp[j]);
        g[off_.v + j] += gb * z[j];
        const double dpre = gb * params_[off_.v + j] * (1.0 - z[j] * z[j]);
        d_proj[j] += dpre;
        d_hist[static_cast<size_t>(last) * J + j] += dpre;
      }
    }

    for (int j = 0; j < J; ++j) {
      if (d_proj[j] == 0.0) continue;
      double *ga = g + off_.a + j * H;
      const double *a = &params_[off_.a + j * H];
      for (int i = 0; i < H; ++i) {
        ga[i] += d_proj[j] * h[i];
        d_hidden[i] += d_proj[j] * a[i];
      }
    }

    const double *x = &enc.input[static_cast<size_t>(t) * W];
    for (int i = 0; i < H; ++i) {
      const double dpre = d_hidden[i] * (1.0 - h[i] * h[i]);
      if (dpre == 0.0) continue;
      g[off_.b1 + i] += dpre;
      double *gw = g + off_.w1 + i * W;
      for (int j = 0; j < W; ++j) gw[j] += dpre * x[j];
    }
  }

  // history projections: L e_k + b_j
  for (int k = 0; k < V; ++k) {
    const double *dh = &d_hist[static_cast<size_t>(k) * J];
    const double *e = &params_[off_.emb + k * E];
    double *ge = g + off_.emb + k * E;
    for (int j = 0; j < J; ++j) {
      if (dh[j] == 0.0) continue;
      g[off_.b_j + j] += dh[j];
      double *gl = g + off_.l + j * E;
      const double *l = &params_[off_.l + j * E];
      for (int i = 0; i < E; ++i) {
        gl[i] += dh[j] * e[i];
        ge[i] += dh[j] * l[i];
      }
    }
  }
}

Checkpoint ToyFTModel::ToCheckpoint() const {
  Checkpoint ckpt;
  ckpt.kind = "toy-ft-model";
  ckpt.dims = {{"vocab_size", config_.vocab_size},
               {"feature_dim", config_.feature_dim},
               {"context", config_.context},
               {"hidden_dim", config_.hidden_dim},
               {"joint_dim", config_.joint_dim},
               {"blank_embedding_dim", config_.blank_embedding_dim}};
  ckpt.arrays["params"] = params_;
  return ckpt;
}

ToyFTModel ToyFTModel::FromCheckpoint(const Checkpoint &ckpt) {
  if (ckpt.kind != "toy-ft-model")
    throw IoError("expected a toy-ft-model checkpoint, got '" + ckpt.kind + "'");
  ToyFTModel m;
  m.config_.vocab_size = static_cast<int>(ckpt.Dim("vocab_size"));
  m.config_.feature_dim = static_cast<int>(ckpt.Dim("feature_dim"));
  m.config_.context = static_cast<int>(ckpt.Dim("context"));
  m.config_.hidden_dim = static_cast<int>(ckpt.Dim("hidden_dim"));
  m.config_.joint_dim = static_cast<int>(ckpt.Dim("joint_dim"));
  m.config_.blank_embedding_dim = static_cast<int>(ckpt.Dim("blank_embedding_dim"));
  m.config_.Check();
  m.off_ = ComputeOffsets(m.config_);
  m.params_ = ckpt.Array("params");
  if (m.params_.size() != m.off_.total)
    throw IoError("toy-ft-model checkpoint: parameter count mismatch");
  return m;
}

std::vector<std::vector<double>> IlmRows(const LmInterface &lm,
                                         std::span<const int> target) {
  std::vector<std::vector<double>> rows;
  rows.reserve(target.size() + 1);
  LmState state = lm.StartState();
  for (size_t u = 0; u <= target.size(); ++u) {
    rows.push_back(lm.LogProbs(state));
    if (u < target.size()) state = lm.Advance(state, target[u]);
  }
  return rows;
}

ModelScorer::ModelScorer(const ToyFTModel &model, const Utterance &utt)
    : model_(&model), enc_(model.Encode(utt)),
      history_proj_(model.HistoryProjections()) {}

std::span<const double> ModelScorer::AmLogits(int t) const {
  const size_t V = model_->Config().vocab_size;
  return {enc_.am.data() + t * V, V};
}

double ModelScorer::BlankLogit(int t, const TokenSequence &history) const {
  const size_t J = model_->Config().joint_dim;
  const int last = history.empty() ? Vocabulary::kEos : history.back();
  return model_->BlankLogit(
      enc_, t, std::span<const double>(history_proj_.data() + last * J, J));
}

}  // namespace ftilm
