// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Desk-scale synthetic corpus: ~500 passages and 200 queries over a fixed
// content-word inventory. Each query has exactly one relevant passage, which
// contains all of the query's content words, so BM25 and a trained dense
// model can both find it. All words have >= 4 letters and none is a stopword,
// so every query is typo-eligible.

#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "typodr/eval.hpp"
#include "typodr/rng.hpp"
#include "typodr/tokenizer.hpp"

namespace typodr {

inline const std::vector<std::string>& toy_word_inventory() {
  static const std::vector<std::string> kWords = {
      "almond",  "anchor",  "animal",  "autumn",  "balance", "basket",
      "bridge",  "bright",  "butter",  "camera",  "candle",  "canyon",
      "carbon",  "castle",  "cherry",  "circle",  "clover",  "cobalt",
      "copper",  "cotton",  "danger",  "desert",  "dinner",  "dragon",
      "editor",  "engine",  "falcon",  "feather", "fiddle",  "finger",
      "forest",  "fossil",  "garden",  "giant",   "ginger",  "glacier",
      "guitar",  "hammer",  "harbor",  "helmet",  "hunter",  "island",
      "jacket",  "jungle",  "kernel",  "kettle",  "ladder",  "lantern",
      "legend",  "lemon",   "lizard",  "locust",  "magnet",  "mantle",
      "marble",  "meadow",  "mirror",  "monkey",  "mountain", "needle",
      "nickel",  "ocean",   "orange",  "orchid",  "oyster",  "palace",
      "panther", "pepper",  "pillow",  "pirate",  "planet",  "pocket",
      "purple",  "rabbit",  "ribbon",  "river",   "rocket",  "saddle",
      "salmon",  "sapphire", "scarlet", "shadow",  "silver",  "spider",
      "spiral",  "spring",  "square",  "stone",   "sugar",   "summer",
      "sunset",  "temple",  "thunder", "tiger",   "timber",  "tunnel",
      "turtle",  "valley",  "velvet",  "violet",  "walnut",  "window",
      "winter",  "wizard",  "yellow",  "zephyr"};
  return kWords;
}

struct ToyCorpus {
  std::vector<std::pair<std::string, std::string>> collection;  // pid, text
  std::vector<std::pair<std::string, std::string>> queries;     // qid, text
  Qrels qrels;
};

inline std::string toy_pid(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "p%03d", i);
  return buf;
}
inline std::string toy_qid(int i) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "q%03d", i);
  return buf;
}

inline ToyCorpus make_toy_corpus(std::uint64_t seed, int n_queries = 200,
                                 int n_distractors = 300) {
  const auto& words = toy_word_inventory();
  Pcg64 rng(derive_seed(seed, 0, "toy-corpus"));
  ToyCorpus corpus;

  std::set<std::vector<std::size_t>> used;
  for (int q = 0; q < n_queries; ++q) {
    std::vector<std::size_t> picks;
    do {
      picks.clear();
      while (picks.size() < 3) {
        std::size_t w = rng.bounded(words.size());
        if (std::find(picks.begin(), picks.end(), w) == picks.end())
          picks.push_back(w);
      }
      std::sort(picks.begin(), picks.end());
    } while (used.count(picks));
    used.insert(picks);

    std::string query = words[picks[0]] + ' ' + words[picks[1]] + ' ' + words[picks[2]];
    corpus.queries.emplace_back(toy_qid(q), query);

    // the relevant passage repeats the query words plus filler
    std::string passage = query;
    for (int f = 0; f < 3; ++f) passage += ' ' + words[rng.bounded(words.size())];
    corpus.collection.emplace_back(toy_pid(q), passage);
    corpus.qrels.add(toy_qid(q), toy_pid(q), 1);
  }

  for (int d = 0; d < n_distractors; ++d) {
    std::string passage;
    for (int f = 0; f < 6; ++f) {
      if (f) passage += ' ';
      passage += words[rng.bounded(words.size())];
    }
    corpus.collection.emplace_back(toy_pid(n_queries + d), passage);
  }
  return corpus;
}

// WordPiece vocab covering the inventory: full words, word prefixes, every
// contiguous substring as a continuation piece, and single letters, so any
// lowercase word tokenizes without [UNK] and typo words split into pieces.
inline std::vector<std::string> make_toy_vocab_tokens() {
  std::set<std::string> starts;
  std::set<std::string> continuations;
  for (const auto& w : toy_word_inventory()) {
    for (std::size_t len = 1; len <= w.size(); ++len)
      starts.insert(w.substr(0, len));
    for (std::size_t i = 1; i < w.size(); ++i)
      for (std::size_t len = 1; len <= w.size() - i; ++len)
        continuations.insert("##" + w.substr(i, len));
  }
  for (char c = 'a'; c <= 'z'; ++c) {
    starts.insert(std::string(1, c));
    continuations.insert("##" + std::string(1, c));
  }
  for (char c = '0'; c <= '9'; ++c) {
    starts.insert(std::string(1, c));
    continuations.insert("##" + std::string(1, c));
  }
  std::vector<std::string> tokens = {"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
  tokens.insert(tokens.end(), starts.begin(), starts.end());
  tokens.insert(tokens.end(), continuations.begin(), continuations.end());
  return tokens;
}

inline WordPieceVocab make_toy_vocab() {
  return WordPieceVocab(make_toy_vocab_tokens());
}

}  // namespace typodr
