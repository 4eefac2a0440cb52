// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Score oracles below were computed by hand from the BM25 formula with
// k1 = 0.9, b = 0.4 and idf(t) = ln(1 + (N - df + 0.5)/(df + 0.5)).

#include <filesystem>
#include <fstream>

#include <catch2/catch_amalgamated.hpp>

#include "typodr/sparse.hpp"

namespace typodr {
namespace {

InvertedIndex fixture() {
  return InvertedIndex::build({
      {"d1", "the quick brown fox"},
      {"d2", "the lazy dog sleeps"},
      {"d3", "quick quick fox jumps over the dog"},
      {"d4", "brown bears eat honey"},
  });
}

}  // namespace

TEST_CASE("idf matches the closed form") {
  InvertedIndex idx = fixture();
  // df = 2 of N = 4: ln(1 + 2.5/2.5) = ln 2
  REQUIRE(idx.idf("quick") == Catch::Approx(0.6931471805599453).margin(1e-12));
  REQUIRE(idx.idf("the") == Catch::Approx(0.3566749439387324).margin(1e-12));
  REQUIRE(idx.idf("honey") == Catch::Approx(1.2039728043259361).margin(1e-12));
  // unseen terms: df = 0
  REQUIRE(idx.idf("missing") == Catch::Approx(2.302585092994046).margin(1e-12));
  REQUIRE(idx.idf("quick") > 0.0);
}

TEST_CASE("bm25 scores match the hand-computed fixture") {
  InvertedIndex idx = fixture();
  auto ranked = idx.search("quick fox", 10);
  REQUIRE(ranked.size() == 2);
  REQUIRE(ranked[0].first == "d3");
  REQUIRE(ranked[0].second == Catch::Approx(1.4938804567268074).margin(1e-12));
  REQUIRE(ranked[1].first == "d1");
  REQUIRE(ranked[1].second == Catch::Approx(1.4290470141755582).margin(1e-12));
}

TEST_CASE("repeated query terms count once") {
  InvertedIndex idx = fixture();
  auto once = idx.search("fox", 10);
  auto twice = idx.search("fox fox", 10);
  REQUIRE(once.size() == twice.size());
  for (std::size_t i = 0; i < once.size(); ++i)
    REQUIRE(once[i].second == Catch::Approx(twice[i].second).margin(1e-12));
}

TEST_CASE("ties break by ascending pid") {
  InvertedIndex idx = InvertedIndex::build({
      {"b", "apple"},
      {"a", "apple"},
      {"c", "pear"},
  });
  auto ranked = idx.search("apple", 10);
  REQUIRE(ranked.size() == 2);
  REQUIRE(ranked[0].first == "a");
  REQUIRE(ranked[1].first == "b");
}

TEST_CASE("k truncates the ranking") {
  InvertedIndex idx = fixture();
  REQUIRE(idx.search("the", 1).size() == 1);
  REQUIRE_THROWS_AS(idx.search("the", 0), ValidationError);
}

TEST_CASE("duplicate pids and empty index are rejected") {
  REQUIRE_THROWS_AS(
      InvertedIndex::build({{"d1", "a"}, {"d1", "b"}}), DuplicatePid);
  InvertedIndex empty = InvertedIndex::build({});
  REQUIRE_THROWS_AS(empty.search("query", 5), EmptyIndex);
}

TEST_CASE("stopword removal is applied when enabled") {
  auto idx = InvertedIndex::build({{"d1", "the cat"}, {"d2", "a dog"}}, true);
  REQUIRE(idx.analyze("the cat") == std::vector<std::string>{"cat"});
  auto keep = InvertedIndex::build({{"d1", "the cat"}}, false);
  REQUIRE(keep.analyze("the cat") == std::vector<std::string>{"the", "cat"});
}

TEST_CASE("index round trip preserves rankings and file bytes") {
  namespace fs = std::filesystem;
  InvertedIndex idx = fixture();
  std::string p1 = (fs::temp_directory_path() / "typodr_idx1.tgix").string();
  std::string p2 = (fs::temp_directory_path() / "typodr_idx2.tgix").string();
  idx.save(p1);
  InvertedIndex loaded = InvertedIndex::load(p1);
  auto a = idx.search("quick brown dog", 10);
  auto b = loaded.search("quick brown dog", 10);
  REQUIRE(a == b);
  loaded.save(p2);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), {});
  std::string b2((std::istreambuf_iterator<char>(f2)), {});
  REQUIRE(!b1.empty());
  REQUIRE(b1 == b2);
  fs::remove(p1);
  fs::remove(p2);
}

}  // namespace typodr
