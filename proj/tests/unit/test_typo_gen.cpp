// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0

#include <catch2/catch_amalgamated.hpp>

#include "typodr/typo_gen.hpp"

namespace typodr {

TEST_CASE("stopword list has the 33 expected terms") {
  const auto& stop = default_stopwords();
  REQUIRE(stop.size() == 33);
  for (const char* w : {"a", "the", "with", "such", "their", "will"})
    REQUIRE(stop.count(w) == 1);
  REQUIRE(stop.count("what") == 0);
}

TEST_CASE("eligibility requires alphabetic length and non-stopword") {
  TypoConfig cfg;
  // "the" is a stopword, "at" too short, "42" not alphabetic, "ab1" has only
  // two alphabetic characters.
  auto idx = eligible_word_indices("the cat at 42 ab1 runs", cfg);
  REQUIRE(idx == std::vector<int>{1, 5});
}

TEST_CASE("stopword match is case-insensitive") {
  TypoConfig cfg;
  REQUIRE(eligible_word_indices("The THE the", cfg).empty());
}

TEST_CASE("each typo kind changes exactly one word by one edit") {
  TypoConfig cfg;
  Pcg64 rng(11);
  const std::string word = "retrieval";
  for (int i = 0; i < 200; ++i) {
    std::string ins = apply_typo(word, TypoKind::kRandInsert, rng);
    REQUIRE(ins.size() == word.size() + 1);
    std::string del = apply_typo(word, TypoKind::kRandDelete, rng);
    REQUIRE(del.size() == word.size() - 1);
    std::string sub = apply_typo(word, TypoKind::kRandSub, rng);
    REQUIRE(sub.size() == word.size());
    REQUIRE(sub != word);
    std::string swp = apply_typo(word, TypoKind::kSwapNeighbor, rng);
    REQUIRE(swp.size() == word.size());
    REQUIRE(swp != word);
    std::string key = apply_typo(word, TypoKind::kSwapAdjacent, rng);
    REQUIRE(key.size() == word.size());
    REQUIRE(key != word);
    // keyboard substitution touches exactly one position, with a neighbour key
    int changed = -1;
    for (std::size_t p = 0; p < word.size(); ++p)
      if (key[p] != word[p]) {
        REQUIRE(changed == -1);
        changed = static_cast<int>(p);
      }
    REQUIRE(changed >= 0);
    const std::string& adj = detail::qwerty_adjacent(word[changed]);
    REQUIRE(adj.find(key[changed]) != std::string::npos);
  }
}

TEST_CASE("qwerty adjacency is symmetric") {
  for (char c = 'a'; c <= 'z'; ++c)
    for (char n : detail::qwerty_adjacent(c))
      REQUIRE(detail::qwerty_adjacent(n).find(c) != std::string::npos);
}

TEST_CASE("degenerate kinds rotate to another kind") {
  TypoConfig cfg;
  cfg.min_word_length = 1;
  // single-letter word: SwapNeighbor is degenerate and must fall through
  cfg.kind_weights = {0, 0, 0, 1, 0};
  Pcg64 rng(5);
  QueryPair p = generate_typo_pair("q", "zebra", cfg, rng);
  REQUIRE(p.typo_text != p.clean_text);
}

TEST_CASE("queries with no eligible words throw") {
  TypoConfig cfg;
  Pcg64 rng(1);
  REQUIRE_THROWS_AS(generate_typo_pair("q", "the of at", cfg, rng), NoEligibleWord);
  REQUIRE_THROWS_AS(generate_typo_pair("q", "", cfg, rng), ValidationError);
}

TEST_CASE("generate_replicas omits ineligible queries from every replica") {
  TypoConfig cfg;
  std::vector<std::pair<std::string, std::string>> queries = {
      {"q1", "weather in paris today"},
      {"q2", "a of the"},  // nothing eligible: dropped everywhere
      {"q3", "league standings"},
  };
  auto reps = generate_replicas(queries, 4, cfg, 9);
  REQUIRE(reps.size() == 4);
  for (const auto& rep : reps) {
    REQUIRE(rep.size() == 2);
    REQUIRE(rep[0].query_id == "q1");
    REQUIRE(rep[1].query_id == "q3");
    for (const auto& p : rep) {
      REQUIRE(p.typo_text != p.clean_text);
      // exactly one whitespace word altered
      auto c = split_whitespace(p.clean_text);
      auto t = split_whitespace(p.typo_text);
      REQUIRE(c.size() == t.size());
      int diff = 0;
      for (std::size_t i = 0; i < c.size(); ++i)
        if (c[i] != t[i]) ++diff;
      REQUIRE(diff == 1);
      REQUIRE(c[p.word_index] != t[p.word_index]);
    }
  }
}

TEST_CASE("replica generation is deterministic and replicas differ") {
  TypoConfig cfg;
  std::vector<std::pair<std::string, std::string>> queries;
  for (int i = 0; i < 20; ++i)
    queries.emplace_back("q" + std::to_string(i),
                         "retrieval question number " + std::to_string(i));
  auto a = generate_replicas(queries, 3, cfg, 123);
  auto b = generate_replicas(queries, 3, cfg, 123);
  for (int k = 0; k < 3; ++k)
    for (std::size_t i = 0; i < a[k].size(); ++i) {
      REQUIRE(a[k][i].typo_text == b[k][i].typo_text);
      REQUIRE(a[k][i].kind == b[k][i].kind);
    }
  int distinct = 0;
  for (std::size_t i = 0; i < a[0].size(); ++i)
    if (a[0][i].typo_text != a[1][i].typo_text) ++distinct;
  REQUIRE(distinct > 0);
}

TEST_CASE("kind weights are validated") {
  TypoConfig cfg;
  cfg.kind_weights = {0.5, 0.5, 0.5, 0, 0};
  REQUIRE_THROWS_AS(cfg.validate(), ValidationError);
  cfg.kind_weights = {0.2, 0.2, 0.2, 0.2, 0.2};
  REQUIRE_NOTHROW(cfg.validate());
}

}  // namespace typodr
