// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0

#include <set>

#include <catch2/catch_amalgamated.hpp>

#include "typodr/toy_corpus.hpp"
#include "typodr/typo_gen.hpp"

namespace typodr {

TEST_CASE("toy corpus has the promised shape") {
  ToyCorpus corpus = make_toy_corpus(42);
  REQUIRE(corpus.queries.size() == 200);
  REQUIRE(corpus.collection.size() == 500);

  std::set<std::string> pids, qids, query_texts;
  for (const auto& [pid, text] : corpus.collection) {
    REQUIRE(!text.empty());
    pids.insert(pid);
  }
  REQUIRE(pids.size() == 500);
  for (const auto& [qid, text] : corpus.queries) {
    qids.insert(qid);
    query_texts.insert(text);
  }
  REQUIRE(qids.size() == 200);
  REQUIRE(query_texts.size() == 200);  // no duplicate queries
}

TEST_CASE("every toy query has exactly one relevant passage containing it") {
  ToyCorpus corpus = make_toy_corpus(42);
  std::map<std::string, std::string> collection(corpus.collection.begin(),
                                                corpus.collection.end());
  for (const auto& [qid, text] : corpus.queries) {
    REQUIRE(corpus.qrels.has_query(qid));
    const auto& judged = corpus.qrels.judgments(qid);
    REQUIRE(judged.size() == 1);
    const auto& [pid, grade] = *judged.begin();
    REQUIRE(grade == 1);
    // the relevant passage contains every query word
    auto words = basic_tokenize(text);
    auto pwords = basic_tokenize(collection.at(pid));
    std::set<std::string> pset(pwords.begin(), pwords.end());
    for (const auto& w : words) REQUIRE(pset.count(w) == 1);
  }
}

TEST_CASE("toy inventory words are typo-eligible") {
  for (const auto& w : toy_word_inventory()) {
    REQUIRE(w.size() >= 4);
    REQUIRE(default_stopwords().count(w) == 0);
    for (char c : w) REQUIRE((c >= 'a' && c <= 'z'));
  }
}

TEST_CASE("toy vocab tokenizes inventory and typo words without UNK") {
  WordPieceVocab vocab = make_toy_vocab();
  for (const auto& w : toy_word_inventory()) {
    TokenSequence seq = wordpiece_tokenize(w, vocab);
    REQUIRE(seq.tokens.size() == 1);
    REQUIRE(seq.tokens[0] == w);
  }
  // typo variants split into known pieces, never [UNK]
  Pcg64 rng(7);
  for (const auto& w : toy_word_inventory()) {
    for (int k = 0; k < kNumTypoKinds; ++k) {
      std::string typo = apply_typo(w, static_cast<TypoKind>(k), rng);
      TokenSequence seq = wordpiece_tokenize(typo, vocab);
      for (const auto& t : seq.tokens) REQUIRE(t != "[UNK]");
    }
  }
}

TEST_CASE("toy corpus generation is deterministic per seed") {
  ToyCorpus a = make_toy_corpus(42);
  ToyCorpus b = make_toy_corpus(42);
  REQUIRE(a.collection == b.collection);
  REQUIRE(a.queries == b.queries);
  ToyCorpus c = make_toy_corpus(43);
  REQUIRE(a.collection != c.collection);
}

}  // namespace typodr
