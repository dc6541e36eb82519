// include/ftilm/harness/corpus.h


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

#ifndef FTILM_HARNESS_CORPUS_H_
#define FTILM_HARNESS_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "ftilm/ilm/language-model.h"

namespace ftilm {

// Word <-> id table.  Id 0 is "<eos>", which ends every text sentence and
// pads LM contexts; blank is not a vocabulary entry.
class Vocabulary {
 public:
  static constexpr int kEos = 0;

  Vocabulary();
  int Add(const std::string &word);
  int Size() const { return static_cast<int>(words_.size()); }
  const std::string &Word(int id) const;
  // Throws InvalidInput for an unknown word.
  int Id(const std::string &word) const;
  bool Contains(const std::string &word) const { return ids_.count(word) != 0; }

  TokenSequence Encode(const std::vector<std::string> &words) const;
  // Drops <eos>.
  std::vector<std::string> Decode(const TokenSequence &tokens) const;

 private:
  std::vector<std::string> words_;
  std::map<std::string, int> ids_;
};

struct Utterance {
  std::string id;
  std::vector<std::string> words;
  std::vector<int> alignment;     // gold emission frame per word
  int num_frames = 0;
  int feature_dim = 0;
  std::vector<double> features;   // num_frames x feature_dim, row-major

  const double *Frame(int t) const {
    return features.data() + static_cast<size_t>(t) * feature_dim;
  }
  void Check() const;
};

struct DataConfig {
  uint64_t seed = 0;
  int num_common = 20;         // ordinary words
  int num_rare = 4;            // tail words, each with a trigger and a partner
  int feature_dim = 8;
  double noise = 0.6;          // per-dimension feature noise (stddev)
  double rare_mix = 0.7;       // share of the partner prototype in a rare word
  int min_span = 2;            // frames per word
  int max_span = 4;
  double pause_prob = 0.3;     // one silence frame between words
  int max_words = 10;
  double end_prob = 0.2;       // sentence end weight in every word's successors
  double trigger_prob = 0.7;   // P(rare word | its trigger) in the text domain
  double rare_keep = 0.1;      // rare words kept (not swapped) in acoustic training
  double rare_max_freq = 0.03; // construction bound on rare tokens in training
  int num_train = 1500;
  int num_dev = 200;
  int num_text = 5000;

  void Check() const;
};

struct ToyCorpus {
  Vocabulary vocab;
  std::vector<int> rare_ids;
  std::map<int, int> partner_of;       // rare id -> common partner id
  std::vector<Utterance> train;        // paired acoustic data (shifted)
  std::vector<Utterance> dev;          // text-domain word statistics
  std::vector<std::vector<std::string>> text;   // LM pretraining text
  // Word prototypes by id, plus silence at index vocab.Size().
  std::vector<std::vector<double>> prototypes;

  bool IsRare(int id) const;
  // Text sentences as token ids, each ending in <eos>.
  std::vector<TokenSequence> TextTokens() const;
};

// Deterministic in config (including seed); throws ConfigError when the
// vocabulary cannot host num_rare trigger/partner pairs.
ToyCorpus GenerateCorpus(const DataConfig &config);

// Fraction of training-split tokens that are rare words.
double RareTrainFrequency(const ToyCorpus &corpus);

// One JSON object per line: {"id", "words", "alignment", "features"}.
void WriteUtterances(const std::vector<Utterance> &utts, std::ostream &os);
std::vector<Utterance> ReadUtterances(std::istream &is);

// Whitespace-tokenized sentences, one per line.
void WriteText(const std::vector<std::vector<std::string>> &text,
               std::ostream &os);
std::vector<std::vector<std::string>> ReadText(std::istream &is);

// Directory layout: train.jsonl, dev.jsonl, text.txt, vocab.json.
void SaveCorpus(const ToyCorpus &corpus, const std::string &dir);
ToyCorpus LoadCorpus(const std::string &dir);

}  // namespace ftilm

#endif  // FTILM_HARNESS_CORPUS_H_
