// bench/ftilm-bench.cc


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

// Serial reference kernels against their OpenMP batch versions.

#include <benchmark/benchmark.h>

#include <cmath>
#include <memory>
#include <vector>

#include "ftilm/base/rng.h"
#include "ftilm/decode/beam-search.h"
#include "ftilm/harness/corpus.h"
#include "ftilm/harness/toy-ft-model.h"
#include "ftilm/ilm/toy-neural-lm.h"
#include "ftilm/lattice/lattice-batch.h"

namespace {

using namespace ftilm;

struct LatticeBatch {
  std::vector<LogProbLattice> lattices;
  std::vector<BandMask> masks;

  explicit LatticeBatch(int n) {
    Rng rng(1);
    for (int i = 0; i < n; ++i) {
      const int T = 50 + rng.UniformInt(50), U = 5 + rng.UniformInt(15);
      LogProbLattice lat(T, U);
      for (int t = 0; t < T; ++t)
        for (int u = 0; u <= U; ++u) {
          lat.Blank(t, u) = std::log(rng.Uniform(0.05, 0.95));
          if (u < U) lat.Label(t, u) = std::log(rng.Uniform(0.05, 0.95));
        }
      lattices.push_back(std::move(lat));
      masks.push_back(BandMask::Full(T, U));
    }
  }
};

const LatticeBatch &Lattices() {
  static const LatticeBatch batch(256);
  return batch;
}

void BM_LossSerial(benchmark::State &state) {
  for (auto _ : state)
    benchmark::DoNotOptimize(serial::BatchFullSumLoss(Lattices().lattices));
}
void BM_LossParallel(benchmark::State &state) {
  for (auto _ : state) benchmark::DoNotOptimize(BatchFullSumLoss(Lattices().lattices));
}
void BM_LossAndGradientsSerial(benchmark::State &state) {
  std::vector<LatticeGradients> g;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        serial::BatchLossAndGradients(Lattices().lattices, Lattices().masks, &g));
}
void BM_LossAndGradientsParallel(benchmark::State &state) {
  std::vector<LatticeGradients> g;
  for (auto _ : state)
    benchmark::DoNotOptimize(
        BatchLossAndGradients(Lattices().lattices, Lattices().masks, &g));
}

struct DecodeSetup {
  ToyCorpus corpus;
  std::unique_ptr<ToyNeuralLm> lm;
  std::unique_ptr<ToyFTModel> model;
  std::vector<std::unique_ptr<ModelScorer>> scorers;
  std::vector<const FrameScorer *> views;

  DecodeSetup() {
    DataConfig d;
    d.num_train = 10;
    d.num_dev = 32;
    d.num_text = 200;
    d.rare_max_freq = 1.0;
    corpus = GenerateCorpus(d);
    ToyLmConfig lc;
    lc.vocab_size = corpus.vocab.Size();
    lm = std::make_unique<ToyNeuralLm>(lc, 1);
    FtModelConfig mc;
    mc.vocab_size = corpus.vocab.Size();
    model = std::make_unique<ToyFTModel>(mc, 2);
    for (const auto &u : corpus.dev) {
      scorers.push_back(std::make_unique<ModelScorer>(*model, u));
      views.push_back(scorers.back().get());
    }
  }
};

const DecodeSetup &Decode() {
  static const DecodeSetup setup;
  return setup;
}

void BM_BeamSearchSerial(benchmark::State &state) {
  DecodeConfig cfg;
  cfg.weights = {0.6, 0.6};
  for (auto _ : state)
    benchmark::DoNotOptimize(serial::BatchBeamSearch(Decode().views, *Decode().lm, cfg));
}
void BM_BeamSearchParallel(benchmark::State &state) {
  DecodeConfig cfg;
  cfg.weights = {0.6, 0.6};
  for (auto _ : state)
    benchmark::DoNotOptimize(BatchBeamSearch(Decode().views, *Decode().lm, cfg));
}

BENCHMARK(BM_LossSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LossParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_LossAndGradientsSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_LossAndGradientsParallel)->Unit(benchmark::kMillisecond)->UseRealTime();
BENCHMARK(BM_BeamSearchSerial)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_BeamSearchParallel)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
