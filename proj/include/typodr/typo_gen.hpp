// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Realistic single-typo query variants. A query pair keeps the clean text,
// the variant, the index of the altered whitespace word and the typo kind.
// Exactly one word is altered per query; candidate words must have at least
// min_word_length alphabetic characters and must not be stopwords.

#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "typodr/errors.hpp"
#include "typodr/rng.hpp"

namespace typodr {

enum class TypoKind : int {
  kRandInsert = 0,
  kRandDelete = 1,
  kRandSub = 2,
  kSwapNeighbor = 3,
  kSwapAdjacent = 4,
};

constexpr int kNumTypoKinds = 5;

inline const char* to_string(TypoKind kind) {
  switch (kind) {
    case TypoKind::kRandInsert: return "RandInsert";
    case TypoKind::kRandDelete: return "RandDelete";
    case TypoKind::kRandSub: return "RandSub";
    case TypoKind::kSwapNeighbor: return "SwapNeighbor";
    case TypoKind::kSwapAdjacent: return "SwapAdjacent";
  }
  return "?";
}

inline TypoKind typo_kind_from_string(std::string_view name) {
  for (int i = 0; i < kNumTypoKinds; ++i) {
    if (name == to_string(static_cast<TypoKind>(i))) return static_cast<TypoKind>(i);
  }
  throw ValidationError("unknown typo kind: " + std::string(name));
}

// Classic 33-term Lucene English stopword list.
inline const std::set<std::string>& default_stopwords() {
  static const std::set<std::string> kStop = {
      "a",   "an",  "and", "are",  "as",   "at",   "be",   "but", "by",
      "for", "if",  "in",  "into", "is",   "it",   "no",   "not", "of",
      "on",  "or",  "such", "that", "the",  "their", "then", "there",
      "these", "they", "this", "to", "was", "will", "with"};
  return kStop;
}

struct TypoConfig {
  int min_word_length = 3;
  std::set<std::string> stopwords = default_stopwords();
  std::array<double, kNumTypoKinds> kind_weights = {0.2, 0.2, 0.2, 0.2, 0.2};
  std::uint64_t seed = 42;

  void validate() const {
    if (min_word_length < 1) throw ValidationError("min_word_length must be >= 1");
    double sum = 0;
    for (double w : kind_weights) {
      if (w < 0) throw ValidationError("kind weight must be non-negative");
      sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ValidationError("kind_weights must sum to 1");
  }
};

struct QueryPair {
  std::string query_id;
  std::string clean_text;
  std::string typo_text;
  int word_index = -1;
  TypoKind kind = TypoKind::kRandInsert;
};

inline std::vector<std::string> split_whitespace(std::string_view text) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t start = i;
    while (i < text.size() && !std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    if (i > start) words.emplace_back(text.substr(start, i - start));
  }
  return words;
}

inline std::string join_words(const std::vector<std::string>& words) {
  std::string out;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) out += ' ';
    out += words[i];
  }
  return out;
}

inline std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return out;
}

// Eligibility counts alphabetic characters only; stopword match is on the
// lowercased word.
inline std::vector<int> eligible_word_indices(std::string_view query_text,
                                              const TypoConfig& config) {
  std::vector<int> eligible;
  const auto words = split_whitespace(query_text);
  for (std::size_t i = 0; i < words.size(); ++i) {
    int alpha = 0;
    for (unsigned char c : words[i])
      if (std::isalpha(c)) ++alpha;
    if (alpha < config.min_word_length) continue;
    if (config.stopwords.count(lowercase(words[i]))) continue;
    eligible.push_back(static_cast<int>(i));
  }
  return eligible;
}

namespace detail {

// QWERTY neighbour table for SwapAdjacent (same row plus vertical neighbours).
inline const std::string& qwerty_adjacent(char c) {
  static const std::array<std::string, 26> kAdj = {
      /*a*/ "qwsz",    /*b*/ "vghn",   /*c*/ "xdfv",  /*d*/ "serfcx",
      /*e*/ "wsdr",    /*f*/ "drtgvc", /*g*/ "ftyhbv", /*h*/ "gyujnb",
      /*i*/ "ujko",    /*j*/ "huikmn", /*k*/ "jiolm", /*l*/ "kop",
      /*m*/ "njk",     /*n*/ "bhjm",   /*o*/ "iklp",  /*p*/ "ol",
      /*q*/ "wa",      /*r*/ "edft",   /*s*/ "awedxz", /*t*/ "rfgy",
      /*u*/ "yhji",    /*v*/ "cfgb",   /*w*/ "qase",  /*x*/ "zsdc",
      /*y*/ "tghu",    /*z*/ "asx"};
  static const std::string kEmpty;
  if (c >= 'a' && c <= 'z') return kAdj[c - 'a'];
  return kEmpty;
}

inline char random_letter(Pcg64& rng) {
  return static_cast<char>('a' + rng.bounded(26));
}

// One draw of a kind; returns the word itself on an identity outcome so the
// caller can re-draw.
inline std::string draw_typo(const std::string& word, TypoKind kind, Pcg64& rng) {
  const std::size_t n = word.size();
  switch (kind) {
    case TypoKind::kRandInsert: {
      std::size_t pos = rng.bounded(n + 1);
      std::string out = word;
      out.insert(out.begin() + pos, random_letter(rng));
      return out;
    }
    case TypoKind::kRandDelete: {
      std::size_t pos = rng.bounded(n);
      std::string out = word;
      out.erase(out.begin() + pos);
      return out;
    }
    case TypoKind::kRandSub: {
      std::size_t pos = rng.bounded(n);
      std::string out = word;
      out[pos] = random_letter(rng);
      return out;
    }
    case TypoKind::kSwapNeighbor: {
      if (n < 2) return word;
      std::size_t pos = rng.bounded(n - 1);
      std::string out = word;
      std::swap(out[pos], out[pos + 1]);
      return out;
    }
    case TypoKind::kSwapAdjacent: {
      std::size_t pos = rng.bounded(n);
      char lower = static_cast<char>(std::tolower(static_cast<unsigned char>(word[pos])));
      const std::string& adj = qwerty_adjacent(lower);
      if (adj.empty()) return word;
      std::string out = word;
      out[pos] = adj[rng.bounded(adj.size())];
      return out;
    }
  }
  return word;
}

constexpr int kMaxDrawsPerKind = 32;

}  // namespace detail

// Applies one typo of the given kind; identity outcomes are rejected and
// re-drawn up to 32 times, after which the kind is declared degenerate.
inline std::string apply_typo(const std::string& word, TypoKind kind, Pcg64& rng) {
  if (word.empty()) throw DegenerateWord("empty word");
  for (int attempt = 0; attempt < detail::kMaxDrawsPerKind; ++attempt) {
    std::string out = detail::draw_typo(word, kind, rng);
    if (out != word) return out;
  }
  throw DegenerateWord("no non-identity outcome for kind " +
                       std::string(to_string(kind)) + " on word '" + word + "'");
}

inline TypoKind pick_kind(const TypoConfig& config, Pcg64& rng) {
  double u = rng.uniform();
  double acc = 0;
  for (int i = 0; i < kNumTypoKinds; ++i) {
    acc += config.kind_weights[i];
    if (u < acc) return static_cast<TypoKind>(i);
  }
  return static_cast<TypoKind>(kNumTypoKinds - 1);
}

// Picks a uniform eligible word and a kind per kind_weights, then applies the
// typo. If the drawn kind is degenerate for the word, another kind is tried;
// if every kind fails the word is abandoned and another eligible word tried.
inline QueryPair generate_typo_pair(const std::string& query_id,
                                    const std::string& query_text,
                                    const TypoConfig& config, Pcg64& rng) {
  if (query_text.empty()) throw ValidationError("empty query text");
  auto words = split_whitespace(query_text);
  std::vector<int> eligible = eligible_word_indices(query_text, config);
  while (!eligible.empty()) {
    std::size_t pick = rng.bounded(eligible.size());
    int word_index = eligible[pick];
    TypoKind kind = pick_kind(config, rng);
    for (int k = 0; k < kNumTypoKinds; ++k) {
      try {
        std::string altered = apply_typo(words[word_index], kind, rng);
        auto typo_words = words;
        typo_words[word_index] = altered;
        return QueryPair{query_id, join_words(words), join_words(typo_words),
                         word_index, kind};
      } catch (const DegenerateWord&) {
        kind = static_cast<TypoKind>((static_cast<int>(kind) + 1) % kNumTypoKinds);
      }
    }
    eligible.erase(eligible.begin() + pick);
  }
  throw NoEligibleWord("no eligible word in query " + query_id);
}

// n independent replicas; replica k draws from derive_seed(seed, k, query_id).
// Queries with no eligible word are omitted from every replica.
inline std::vector<std::vector<QueryPair>> generate_replicas(
    const std::vector<std::pair<std::string, std::string>>& queries, int n,
    const TypoConfig& config, std::uint64_t seed) {
  if (n < 1) throw ValidationError("replica count must be >= 1");
  std::vector<std::vector<QueryPair>> replicas(n);
  for (const auto& [qid, text] : queries) {
    if (eligible_word_indices(text, config).empty()) continue;
    for (int k = 0; k < n; ++k) {
      Pcg64 rng(derive_seed(seed, static_cast<std::uint64_t>(k), qid));
      replicas[k].push_back(generate_typo_pair(qid, text, config, rng));
    }
  }
  return replicas;
}

}  // namespace typodr
