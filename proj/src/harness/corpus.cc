// src/harness/corpus.cc


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

#include "ftilm/harness/corpus.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "json.hpp"

#include "ftilm/base/errors.h"
#include "ftilm/base/rng.h"

namespace ftilm {

using nlohmann::json;

Vocabulary::Vocabulary() { Add("<eos>"); }

int Vocabulary::Add(const std::string &word) {
  auto it = ids_.find(word);
  if (it != ids_.end()) return it->second;
  int id = Size();
  words_.push_back(word);
  ids_.emplace(word, id);
  return id;
}

const std::string &Vocabulary::Word(int id) const {
  if (id < 0 || id >= Size())
    throw InvalidInput("Vocabulary: id " + std::to_string(id) + " out of range");
  return words_[id];
}

int Vocabulary::Id(const std::string &word) const {
  auto it = ids_.find(word);
  if (it == ids_.end()) throw InvalidInput("Vocabulary: unknown word '" + word + "'");
  return it->second;
}

TokenSequence Vocabulary::Encode(const std::vector<std::string> &words) const {
  TokenSequence ids;
  ids.reserve(words.size());
  for (const auto &w : words) ids.push_back(Id(w));
  return ids;
}

std::vector<std::string> Vocabulary::Decode(const TokenSequence &tokens) const {
  std::vector<std::string> words;
  for (int id : tokens)
    if (id != kEos) words.push_back(Word(id));
  return words;
}

void Utterance::Check() const {
  if (num_frames <= 0 || feature_dim <= 0 ||
      features.size() != static_cast<size_t>(num_frames) * feature_dim)
    throw InvalidInput("Utterance " + id + ": bad feature matrix");
  if (alignment.size() != words.size())
    throw InvalidInput("Utterance " + id + ": alignment/words length mismatch");
  for (size_t i = 0; i < alignment.size(); ++i)
    if (alignment[i] < 0 || alignment[i] >= num_frames ||
        (i > 0 && alignment[i] < alignment[i - 1]))
      throw InvalidInput("Utterance " + id + ": alignment not monotone in range");
}

void DataConfig::Check() const {
  if (num_rare < 0 || num_common < 1)
    throw ConfigError("DataConfig: need at least one common word");
  if (num_common < 2 * num_rare + 2)
    throw ConfigError("DataConfig: " + std::to_string(num_common) +
                      " common words cannot host " + std::to_string(num_rare) +
                      " rare words (need 2 per rare word plus 2)");
  if (feature_dim < 1 || min_span < 1 || max_span < min_span || max_words < 1)
    throw ConfigError("DataConfig: bad dimensions");
  if (noise < 0.0 || rare_mix < 0.0 || rare_mix > 1.0)
    throw ConfigError("DataConfig: noise must be >= 0 and rare_mix in [0, 1]");
  for (double p : {pause_prob, end_prob, trigger_prob, rare_keep})
    if (p < 0.0 || p > 1.0) throw ConfigError("DataConfig: probability outside [0, 1]");
  if (num_train < 1 || num_dev < 1 || num_text < 1)
    throw ConfigError("DataConfig: every split needs at least one sentence");
}

bool ToyCorpus::IsRare(int id) const {
  return std::find(rare_ids.begin(), rare_ids.end(), id) != rare_ids.end();
}

std::vector<TokenSequence> ToyCorpus::TextTokens() const {
  std::vector<TokenSequence> out;
  out.reserve(text.size());
  for (const auto &s : text) {
    TokenSequence ids = vocab.Encode(s);
    ids.push_back(Vocabulary::kEos);
    out.push_back(std::move(ids));
  }
  return out;
}

namespace {

const char *const kCommonWords[] = {
    "the", "cat", "sat", "on", "mat", "dog", "ran", "far", "big", "red",
    "sun", "hot", "day", "we", "go", "to", "see", "sea", "old", "man",
    "boat", "fish", "net", "pull", "rope", "wind", "blew", "hard", "cold",
    "rain", "fell", "down"};
const char *const kRareWords[] = {"quokka", "zephyr", "obelisk", "marimba",
                                  "sextant", "tundra", "gazebo", "lichen"};

std::string CommonName(int i) {
  if (i < static_cast<int>(std::size(kCommonWords))) return kCommonWords[i];
  return "w" + std::to_string(i);
}

std::string RareName(int i) {
  if (i < static_cast<int>(std::size(kRareWords))) return kRareWords[i];
  return "rare" + std::to_string(i);
}

struct Distribution {
  std::vector<int> ids;
  std::vector<double> probs;

  int Sample(Rng *rng) const {
    double u = rng->Uniform(), acc = 0.0;
    for (size_t i = 0; i < ids.size(); ++i) {
      acc += probs[i];
      if (u < acc) return ids[i];
    }
    return ids.back();
  }
};

// First-order word source; id kEos ends a sentence.
struct WordSource {
  Distribution start;
  std::map<int, Distribution> next;
  int max_words = 10;

  std::vector<int> Sentence(Rng *rng) const {
    std::vector<int> ids;
    int w = start.Sample(rng);
    while (true) {
      ids.push_back(w);
      if (static_cast<int>(ids.size()) == max_words) break;
      w = next.at(w).Sample(rng);
      if (w == Vocabulary::kEos) break;
    }
    return ids;
  }
};

Distribution RandomWeights(const std::vector<int> &ids, Rng *rng, double mass) {
  Distribution d;
  d.ids = ids;
  double total = 0.0;
  for (size_t i = 0; i < ids.size(); ++i) {
    d.probs.push_back(rng->Uniform(0.5, 1.5));
    total += d.probs.back();
  }
  for (double &p : d.probs) p *= mass / total;
  return d;
}

Utterance Render(const std::string &id, const std::vector<std::string> &words,
                 const std::vector<int> &ids, const ToyCorpus &corpus,
                 const DataConfig &cfg, Rng *rng) {
  const int F = cfg.feature_dim;
  const std::vector<double> &silence = corpus.prototypes.back();
  std::vector<const std::vector<double> *> frames;
  Utterance utt;
  utt.id = id;
  utt.words = words;
  frames.push_back(&silence);
  for (size_t i = 0; i < ids.size(); ++i) {
    if (i > 0 && rng->Uniform() < cfg.pause_prob) frames.push_back(&silence);
    int span = cfg.min_span + rng->UniformInt(cfg.max_span - cfg.min_span + 1);
    int begin = static_cast<int>(frames.size());
    for (int k = 0; k < span; ++k) frames.push_back(&corpus.prototypes[ids[i]]);
    utt.alignment.push_back(begin + span / 2);
  }
  frames.push_back(&silence);
  utt.num_frames = static_cast<int>(frames.size());
  utt.feature_dim = F;
  utt.features.reserve(frames.size() * F);
  for (const auto *proto : frames)
    for (int f = 0; f < F; ++f)
      utt.features.push_back((*proto)[f] + cfg.noise * rng->Normal());
  return utt;
}

}  // namespace

ToyCorpus GenerateCorpus(const DataConfig &cfg) {
  cfg.Check();
  ToyCorpus corpus;
  std::vector<int> common, rare;
  for (int i = 0; i < cfg.num_common; ++i) common.push_back(corpus.vocab.Add(CommonName(i)));
  for (int i = 0; i < cfg.num_rare; ++i) rare.push_back(corpus.vocab.Add(RareName(i)));
  corpus.rare_ids = rare;
  const int V = corpus.vocab.Size();

  // Triggers and partners are disjoint sets of common words.
  Rng pick = Rng::Stream(cfg.seed, "data-roles");
  std::vector<int> shuffled = common;
  for (int i = static_cast<int>(shuffled.size()) - 1; i > 0; --i)
    std::swap(shuffled[i], shuffled[pick.UniformInt(i + 1)]);
  std::map<int, int> trigger_of;
  for (int i = 0; i < cfg.num_rare; ++i) {
    trigger_of[rare[i]] = shuffled[i];
    corpus.partner_of[rare[i]] = shuffled[cfg.num_rare + i];
  }

  Rng proto = Rng::Stream(cfg.seed, "data-prototypes");
  corpus.prototypes.assign(V + 1, std::vector<double>(cfg.feature_dim, 0.0));
  for (int id : common)
    for (double &x : corpus.prototypes[id]) x = proto.Normal();
  for (double &x : corpus.prototypes[V]) x = proto.Normal();  // silence
  for (int r : rare) {
    const auto &partner = corpus.prototypes[corpus.partner_of[r]];
    for (int f = 0; f < cfg.feature_dim; ++f)
      corpus.prototypes[r][f] =
          cfg.rare_mix * partner[f] + (1.0 - cfg.rare_mix) * proto.Normal();
  }
  corpus.prototypes[Vocabulary::kEos].clear();

  Rng lm = Rng::Stream(cfg.seed, "data-source");
  WordSource source;
  source.max_words = cfg.max_words;
  source.start = RandomWeights(common, &lm, 1.0);
  const int fanout = std::min(4, cfg.num_common - 1);
  for (int w : common) {
    std::vector<int> succ;
    while (static_cast<int>(succ.size()) < fanout) {
      int c = common[lm.UniformInt(cfg.num_common)];
      if (c != w && std::find(succ.begin(), succ.end(), c) == succ.end())
        succ.push_back(c);
    }
    Distribution d = RandomWeights(succ, &lm, 1.0 - cfg.end_prob);
    d.ids.push_back(Vocabulary::kEos);
    d.probs.push_back(cfg.end_prob);
    source.next[w] = d;
  }
  for (int r : rare) {
    source.next[r] = source.next[corpus.partner_of[r]];
    Distribution &d = source.next[trigger_of[r]];
    for (double &p : d.probs) p *= 1.0 - cfg.trigger_prob;
    d.ids.push_back(r);
    d.probs.push_back(cfg.trigger_prob);
  }

  auto to_words = [&](const std::vector<int> &ids) {
    std::vector<std::string> w;
    for (int id : ids) w.push_back(corpus.vocab.Word(id));
    return w;
  };

  Rng text_rng = Rng::Stream(cfg.seed, "data-text");
  for (int i = 0; i < cfg.num_text; ++i)
    corpus.text.push_back(to_words(source.Sentence(&text_rng)));

  auto make_split = [&](const std::string &name, int count, bool shifted) {
    Rng words_rng = Rng::Stream(cfg.seed, "data-" + name + "-words");
    Rng feat_rng = Rng::Stream(cfg.seed, "data-" + name + "-features");
    std::vector<Utterance> split;
    for (int i = 0; i < count; ++i) {
      std::vector<int> ids = source.Sentence(&words_rng);
      if (shifted)
        for (int &id : ids)
          if (corpus.IsRare(id) && words_rng.Uniform() >= cfg.rare_keep)
            id = corpus.partner_of[id];
      char buf[32];
      std::snprintf(buf, sizeof(buf), "%s-%05d", name.c_str(), i);
      split.push_back(Render(buf, to_words(ids), ids, corpus, cfg, &feat_rng));
    }
    return split;
  };
  corpus.train = make_split("train", cfg.num_train, true);
  corpus.dev = make_split("dev", cfg.num_dev, false);

  double freq = RareTrainFrequency(corpus);
  if (freq > cfg.rare_max_freq)
    throw ConfigError("GenerateCorpus: rare words make up " +
                      std::to_string(freq) +
                      " of training tokens, above rare_max_freq");
  return corpus;
}

double RareTrainFrequency(const ToyCorpus &corpus) {
  int64_t rare = 0, total = 0;
  for (const auto &utt : corpus.train)
    for (const auto &w : utt.words) {
      ++total;
      if (corpus.IsRare(corpus.vocab.Id(w))) ++rare;
    }
  return total == 0 ? 0.0 : static_cast<double>(rare) / total;
}

void WriteUtterances(const std::vector<Utterance> &utts, std::ostream &os) {
  for (const auto &utt : utts) {
    json frames = json::array();
    for (int t = 0; t < utt.num_frames; ++t)
      frames.push_back(std::vector<double>(utt.Frame(t), utt.Frame(t) + utt.feature_dim));
    json j = {{"id", utt.id},
              {"words", utt.words},
              {"alignment", utt.alignment},
              {"features", frames}};
    os << j.dump() << '\n';
  }
}

std::vector<Utterance> ReadUtterances(std::istream &is) {
  std::vector<Utterance> utts;
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      json j = json::parse(line);
      Utterance utt;
      utt.id = j.at("id").get<std::string>();
      utt.words = j.at("words").get<std::vector<std::string>>();
      utt.alignment = j.at("alignment").get<std::vector<int>>();
      auto frames = j.at("features").get<std::vector<std::vector<double>>>();
      utt.num_frames = static_cast<int>(frames.size());
      utt.feature_dim = frames.empty() ? 0 : static_cast<int>(frames[0].size());
      for (const auto &f : frames) {
        if (static_cast<int>(f.size()) != utt.feature_dim)
          throw InvalidInput("ragged feature matrix");
        utt.features.insert(utt.features.end(), f.begin(), f.end());
      }
      utt.Check();
      utts.push_back(std::move(utt));
    } catch (const json::exception &e) {
      throw IoError("utterance line " + std::to_string(line_no) + ": " + e.what());
    } catch (const InvalidInput &e) {
      throw IoError("utterance line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return utts;
}

void WriteText(const std::vector<std::vector<std::string>> &text,
               std::ostream &os) {
  for (const auto &s : text) {
    for (size_t i = 0; i < s.size(); ++i) os << (i ? " " : "") << s[i];
    os << '\n';
  }
}

std::vector<std::vector<std::string>> ReadText(std::istream &is) {
  std::vector<std::vector<std::string>> text;
  std::string line;
  while (std::getline(is, line)) {
    std::istringstream in(line);
    std::vector<std::string> words;
    for (std::string w; in >> w;) words.push_back(w);
    if (!words.empty()) text.push_back(std::move(words));
  }
  return text;
}

namespace {

std::ofstream OpenOut(const std::filesystem::path &p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot write " + p.string());
  os.precision(17);
  return os;
}

std::ifstream OpenIn(const std::filesystem::path &p) {
  std::ifstream is(p);
  if (!is) throw IoError("cannot read " + p.string());
  return is;
}

}  // namespace

void SaveCorpus(const ToyCorpus &corpus, const std::string &dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  {
    auto os = OpenOut(fs::path(dir) / "train.jsonl");
    WriteUtterances(corpus.train, os);
  }
  {
    auto os = OpenOut(fs::path(dir) / "dev.jsonl");
    WriteUtterances(corpus.dev, os);
  }
  {
    auto os = OpenOut(fs::path(dir) / "text.txt");
    WriteText(corpus.text, os);
  }
  std::vector<std::string> words;
  for (int i = 0; i < corpus.vocab.Size(); ++i) words.push_back(corpus.vocab.Word(i));
  json partners = json::object();
  for (auto [r, p] : corpus.partner_of)
    partners[corpus.vocab.Word(r)] = corpus.vocab.Word(p);
  std::vector<std::string> rare;
  for (int r : corpus.rare_ids) rare.push_back(corpus.vocab.Word(r));
  json j = {{"words", words},
            {"rare", rare},
            {"partners", partners},
            {"prototypes", corpus.prototypes}};
  auto os = OpenOut(fs::path(dir) / "vocab.json");
  os << j.dump(1) << '\n';
}

ToyCorpus LoadCorpus(const std::string &dir) {
  namespace fs = std::filesystem;
  ToyCorpus corpus;
  try {
    auto is = OpenIn(fs::path(dir) / "vocab.json");
    json j = json::parse(is);
    auto words = j.at("words").get<std::vector<std::string>>();
    if (words.empty() || words[0] != "<eos>")
      throw IoError("vocab.json: first word must be <eos>");
    for (const auto &w : words) corpus.vocab.Add(w);
    for (const auto &w : j.at("rare").get<std::vector<std::string>>())
      corpus.rare_ids.push_back(corpus.vocab.Id(w));
    for (auto &[r, p] : j.at("partners").items())
      corpus.partner_of[corpus.vocab.Id(r)] = corpus.vocab.Id(p.get<std::string>());
    corpus.prototypes = j.at("prototypes").get<std::vector<std::vector<double>>>();
  } catch (const json::exception &e) {
    throw IoError(std::string("vocab.json: ") + e.what());
  }
  {
    auto is = OpenIn(fs::path(dir) / "train.jsonl");
    corpus.train = ReadUtterances(is);
  }
  {
    auto is = OpenIn(fs::path(dir) / "dev.jsonl");
    corpus.dev = ReadUtterances(is);
  }
  {
    auto is = OpenIn(fs::path(dir) / "text.txt");
    corpus.text = ReadText(is);
  }
  return corpus;
}

}  // namespace ftilm
