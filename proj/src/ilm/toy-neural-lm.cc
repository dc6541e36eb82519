// src/ilm/toy-neural-lm.cc

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

#include "ftilm/ilm/toy-neural-lm.h"

#include <cmath>
#include <sstream>

#include "ftilm/base/errors.h"
#include "ftilm/base/log-math.h"
#include "ftilm/base/parallel.h"
#include "ftilm/base/rng.h"

namespace ftilm {

void ToyLmConfig::Check() const {
  if (vocab_size < 1 || order < 1 || embedding_dim < 1 || hidden_dim < 1)
    throw ConfigError("ToyLmConfig: all dimensions must be positive");
  if (eos_id < 0 || eos_id >= vocab_size)
    throw ConfigError("ToyLmConfig: eos_id outside the vocabulary");
}

ToyNeuralLm::Offsets ToyNeuralLm::ComputeOffsets(const ToyLmConfig &c) {
  Offsets o{};
  const size_t V = c.vocab_size, E = c.embedding_dim, H = c.hidden_dim,
               N = c.order;
  o.emb = 0;
  o.w_hidden = o.emb + V * E;
  o.b_hidden = o.w_hidden + H * N * E;
  o.w_out = o.b_hidden + H;
  o.b_out = o.w_out + V * H;
  o.total = o.b_out + V;
  return o;
}

int64_t ToyNeuralLm::NumParams(const ToyLmConfig &config) {
  return static_cast<int64_t>(ComputeOffsets(config).total);
}

ToyNeuralLm::ToyNeuralLm(const ToyLmConfig &config, uint64_t seed)
    : config_(config) {
  config_.Check();
  offsets_ = ComputeOffsets(config_);
  params_.assign(offsets_.total, 0.0);
  Rng rng = Rng::Stream(seed, "ilm-init");
  for (size_t i = 0; i < offsets_.b_hidden; ++i)
    params_[i] = rng.Normal(0.0, config_.init_scale);
  for (size_t i = offsets_.w_out; i < offsets_.b_out; ++i)
    params_[i] = rng.Normal(0.0, config_.init_scale);
}

LmState ToyNeuralLm::StartState() const {
  return LmState(config_.order, config_.eos_id);
}

LmState ToyNeuralLm::Advance(const LmState &state, int token) const {
  if (token < 0 || token >= config_.vocab_size)
    throw InvalidInput("ToyNeuralLm::Advance: token out of range");
  LmState next(state.begin() + 1, state.end());
  next.push_back(token);
  return next;
}

void ToyNeuralLm::Forward(const LmState &context, std::vector<double> *input,
                          std::vector<double> *hidden,
                          std::vector<double> *logits) const {
  const int V = config_.vocab_size, E = config_.embedding_dim,
            H = config_.hidden_dim, N = config_.order;
  if (static_cast<int>(context.size()) != N)
    throw InvalidInput("ToyNeuralLm: context has wrong order");
  input->resize(N * E);
  for (int i = 0; i < N; ++i) {
    const double *emb = &params_[offsets_.emb + context[i] * E];
    std::copy(emb, emb + E, input->begin() + i * E);
  }
  hidden->resize(H);
  for (int h = 0; h < H; ++h) {
    const double *w = &params_[offsets_.w_hidden + h * N * E];
    double acc = params_[offsets_.b_hidden + h];
    for (int j = 0; j < N * E; ++j) acc += w[j] * (*input)[j];
    (*hidden)[h] = std::tanh(acc);
  }
  logits->resize(V);
  for (int v = 0; v < V; ++v) {
    const double *w = &params_[offsets_.w_out + v * H];
    double acc = params_[offsets_.b_out + v];
    for (int h = 0; h < H; ++h) acc += w[h] * (*hidden)[h];
    (*logits)[v] = acc;
  }
}

std::vector<double> ToyNeuralLm::LogProbs(const LmState &state) const {
  std::vector<double> input, hidden, logits;
  Forward(state, &input, &hidden, &logits);
  LogSoftmax(logits, logits);
  return logits;
}

double ToyNeuralLm::NllAndGradient(std::span<const TokenSequence> sentences,
                                   std::vector<double> *grad,
                                   int64_t *num_tokens) const {
  const int V = config_.vocab_size, E = config_.embedding_dim,
            H = config_.hidden_dim, N = config_.order;
  if (grad != nullptr && grad->size() != params_.size())
    throw InvalidInput("ToyNeuralLm: gradient buffer has wrong size");
  std::vector<double> input, hidden, logits, d_hidden(H), d_pre(H);
  double nll = 0.0;
  int64_t count = 0;
  for (const auto &sentence : sentences) {
    LmState state = StartState();
    for (int token : sentence) {
      Forward(state, &input, &hidden, &logits);
      LogSoftmax(logits, logits);
      nll -= logits[token];
      ++count;
      if (grad != nullptr) {
        double *g = grad->data();
        // d nll / d logits = softmax - onehot
        std::fill(d_hidden.begin(), d_hidden.end(), 0.0);
        for (int v = 0; v < V; ++v) {
          double d = std::exp(logits[v]) - (v == token ? 1.0 : 0.0);
          g[offsets_.b_out + v] += d;
          double *gw = g + offsets_.w_out + v * H;
          const double *w = &params_[offsets_.w_out + v * H];
          for (int h = 0; h < H; ++h) {
            gw[h] += d * hidden[h];
            d_hidden[h] += d * w[h];
          }
        }
        for (int h = 0; h < H; ++h)
          d_pre[h] = d_hidden[h] * (1.0 - hidden[h] * hidden[h]);
        for (int h = 0; h < H; ++h) {
          g[offsets_.b_hidden + h] += d_pre[h];
          double *gw = g + offsets_.w_hidden + h * N * E;
          const double *w = &params_[offsets_.w_hidden + h * N * E];
          for (int j = 0; j < N * E; ++j) {
            gw[j] += d_pre[h] * input[j];
            // embedding gradient, input slot j belongs to context[j / E]
            g[offsets_.emb + state[j / E] * E + j % E] += d_pre[h] * w[j];
          }
        }
      }
      state = Advance(state, token);
    }
  }
  if (num_tokens != nullptr) *num_tokens = count;
  return nll;
}

Checkpoint ToyNeuralLm::ToCheckpoint() const {
  Checkpoint ckpt;
  ckpt.kind = "toy-neural-lm";
  ckpt.dims = {{"vocab_size", config_.vocab_size},
               {"order", config_.order},
               {"embedding_dim", config_.embedding_dim},
               {"hidden_dim", config_.hidden_dim},
               {"eos_id", config_.eos_id}};
  ckpt.arrays["params"] = params_;
  return ckpt;
}

ToyNeuralLm ToyNeuralLm::FromCheckpoint(const Checkpoint &ckpt) {
  if (ckpt.kind != "toy-neural-lm")
    throw IoError("expected a toy-neural-lm checkpoint, got '" + ckpt.kind + "'");
  ToyNeuralLm lm;
  lm.config_.vocab_size = static_cast<int>(ckpt.Dim("vocab_size"));
  lm.config_.order = static_cast<int>(ckpt.Dim("order"));
  lm.config_.embedding_dim = static_cast<int>(ckpt.Dim("embedding_dim"));
  lm.config_.hidden_dim = static_cast<int>(ckpt.Dim("hidden_dim"));
  lm.config_.eos_id = static_cast<int>(ckpt.Dim("eos_id"));
  lm.config_.Check();
  lm.offsets_ = ComputeOffsets(lm.config_);
  lm.params_ = ckpt.Array("params");
  if (lm.params_.size() != lm.offsets_.total)
    throw IoError("toy-neural-lm checkpoint: parameter count mismatch");
  return lm;
}

std::vector<double> Pretrain(ToyNeuralLm *lm,
                             const std::vector<TokenSequence> &corpus,
                             const PretrainOptions &opts) {
  if (opts.steps < 0) throw ConfigError("Pretrain: negative step count");
  if (corpus.empty()) throw InvalidInput("Pretrain: empty corpus");
  constexpr size_t kChunk = 8;
  const size_t num_params = lm->Params().size();
  Rng rng = Rng::Stream(opts.seed, "ilm-batch");
  std::vector<double> velocity(num_params, 0.0), grad(num_params);
  std::vector<double> curve;
  curve.reserve(opts.steps);
  std::vector<TokenSequence> batch;

  for (int step = 0; step < opts.steps; ++step) {
    if (opts.batch_size <= 0) {
      batch = corpus;
    } else {
      batch.clear();
      for (int i = 0; i < opts.batch_size; ++i)
        batch.push_back(corpus[rng.UniformInt(static_cast<int>(corpus.size()))]);
    }
    const size_t num_chunks = (batch.size() + kChunk - 1) / kChunk;
    std::vector<std::vector<double>> chunk_grads(num_chunks);
    std::vector<double> chunk_nll(num_chunks);
    std::vector<int64_t> chunk_tokens(num_chunks);
    const ToyNeuralLm &model = *lm;
    ParallelFor(num_chunks, [&](size_t c) {
      chunk_grads[c].assign(num_params, 0.0);
      size_t begin = c * kChunk, end = std::min(batch.size(), begin + kChunk);
      chunk_nll[c] = model.NllAndGradient(
          std::span<const TokenSequence>(batch.data() + begin, end - begin),
          &chunk_grads[c], &chunk_tokens[c]);
    });
    double nll = 0.0;
    int64_t tokens = 0;
    std::fill(grad.begin(), grad.end(), 0.0);
    for (size_t c = 0; c < num_chunks; ++c) {
      nll += chunk_nll[c];
      tokens += chunk_tokens[c];
      for (size_t i = 0; i < num_params; ++i) grad[i] += chunk_grads[c][i];
    }
    const double loss = nll / static_cast<double>(tokens);
    if (!std::isfinite(loss)) {
      std::ostringstream msg;
      msg << "ILM pretraining diverged at step " << step << " (loss " << loss
          << ", learning rate " << opts.learning_rate << ")";
      throw TrainingDiverged(msg.str());
    }
    curve.push_back(loss);
    std::span<double> params = lm->Params();
    for (size_t i = 0; i < num_params; ++i) {
      velocity[i] = opts.momentum * velocity[i] + grad[i] / tokens;
      params[i] -= opts.learning_rate * velocity[i];
    }
  }
  return curve;
}

ToyNeuralLm FrozenLm::Unfreeze() const {
  throw UnsupportedOperation(
      "FrozenLm::Unfreeze: a frozen ILM cannot be made trainable again");
}

FrozenLm Freeze(ToyNeuralLm lm) {
  return FrozenLm(std::make_shared<const ToyNeuralLm>(std::move(lm)));
}

}  // namespace ftilm
