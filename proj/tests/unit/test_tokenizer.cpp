// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0

#include <filesystem>
#include <fstream>
#include <sstream>

#include <catch2/catch_amalgamated.hpp>

#include "typodr/tokenizer.hpp"

namespace typodr {
namespace {

WordPieceVocab test_vocab() {
  return WordPieceVocab::load(std::string(TYPODR_DATA_DIR) + "/mini_vocab.txt");
}

}  // namespace

TEST_CASE("basic tokenization lowercases and splits punctuation") {
  auto words = basic_tokenize("Who's there? (nobody)");
  REQUIRE(words == std::vector<std::string>{"who", "'", "s", "there", "?", "(",
                                            "nobody", ")"});
}

TEST_CASE("greedy longest-match wordpiece") {
  WordPieceVocab vocab = test_vocab();
  auto seq = wordpiece_tokenize("information", vocab);
  REQUIRE(seq.tokens == std::vector<std::string>{"information"});
  seq = wordpiece_tokenize("infromation", vocab);
  REQUIRE(seq.tokens ==
          std::vector<std::string>{"in", "##fr", "##oma", "##tion"});
}

TEST_CASE("unmatchable and overlong words become [UNK]") {
  WordPieceVocab vocab = test_vocab();
  auto seq = wordpiece_tokenize(std::string(101, 'x'), vocab);
  REQUIRE(seq.tokens == std::vector<std::string>{"[UNK]"});
  // exactly 100 chars still tokenizes
  seq = wordpiece_tokenize(std::string(100, 'x'), vocab);
  REQUIRE(seq.tokens.size() == 100);
  REQUIRE(seq.tokens[0] == "x");
  REQUIRE(seq.tokens[1] == "##x");
}

TEST_CASE("tokenizer matches the independent wordpiece golden file") {
  WordPieceVocab vocab = test_vocab();
  std::ifstream in(std::string(TYPODR_DATA_DIR) + "/wordpiece_golden.tsv");
  REQUIRE(in.good());
  std::string line;
  int checked = 0;
  while (std::getline(in, line)) {
    auto tab = line.find('\t');
    REQUIRE(tab != std::string::npos);
    std::string word = line.substr(0, tab);
    std::vector<std::string> expected;
    std::stringstream ss(line.substr(tab + 1));
    std::string tok;
    while (ss >> tok) expected.push_back(tok);
    auto seq = wordpiece_tokenize(word, vocab);
    INFO("word: " << word);
    REQUIRE(seq.tokens == expected);
    ++checked;
  }
  REQUIRE(checked == 25);
}

TEST_CASE("token ids follow vocab line numbers") {
  WordPieceVocab vocab = test_vocab();
  REQUIRE(vocab.pad_id() == 0);
  REQUIRE(vocab.unk_id() == 1);
  REQUIRE(vocab.cls_id() == 2);
  REQUIRE(vocab.sep_id() == 3);
  auto seq = wordpiece_tokenize("information", vocab);
  REQUIRE(seq.ids == std::vector<int>{vocab.id("information")});
}

TEST_CASE("tokenization difference counts typo-side multiset surplus") {
  WordPieceVocab vocab = test_vocab();
  // one whole word swapped for another whole word
  REQUIRE(tokenization_difference("a apple c", "a apply c", vocab) == 1);
  // one word exploded into four pieces
  REQUIRE(tokenization_difference("information", "infromation", vocab) == 4);
  // identical queries
  REQUIRE(tokenization_difference("apple apple", "apple apple", vocab) == 0);
  // multiset semantics: duplicate token only partially covered
  REQUIRE(tokenization_difference("apple", "apple apple", vocab) == 1);
}

TEST_CASE("difference histogram counts pairs per difference") {
  WordPieceVocab vocab = test_vocab();
  std::vector<QueryPair> pairs;
  pairs.push_back({"q1", "information", "infromation", 0, TypoKind::kRandSub});
  pairs.push_back({"q2", "apple", "apply", 0, TypoKind::kRandSub});
  pairs.push_back({"q3", "apple", "apple", 0, TypoKind::kRandSub});
  auto h = difference_histogram(pairs, vocab);
  REQUIRE(h.at(4) == 1);
  REQUIRE(h.at(1) == 1);
  REQUIRE(h.at(0) == 1);
}

TEST_CASE("char codes frame words with BOW and EOW") {
  auto row = encode_word_chars("cat", 8);
  REQUIRE(row == std::vector<int>{kCharBow, 'c', 'a', 't', kCharEow, kCharPad,
                                  kCharPad, kCharPad});
}

TEST_CASE("char codes truncate long words keeping the frame") {
  auto row = encode_word_chars("abcdefgh", 6);
  REQUIRE(row.size() == 6);
  REQUIRE(row.front() == kCharBow);
  REQUIRE(row[1] == 'a');
  REQUIRE(row[4] == 'd');
  REQUIRE(row[5] == kCharEow);
}

TEST_CASE("special words get their own char ids") {
  auto row = encode_special_word(kCharCls, 5);
  REQUIRE(row == std::vector<int>{kCharBow, kCharCls, kCharEow, kCharPad,
                                  kCharPad});
}

TEST_CASE("char encode covers every word and stays in range") {
  auto codes = char_encode({"hello", "WORLD", "x"}, 10);
  REQUIRE(codes.codes.size() == 3);
  for (const auto& row : codes.codes) {
    REQUIRE(row.size() == 10);
    for (int c : row) {
      REQUIRE(c >= 0);
      REQUIRE(c < kCharVocabSize);
    }
  }
}

TEST_CASE("vocab requires the special tokens") {
  namespace fs = std::filesystem;
  std::string path = (fs::temp_directory_path() / "typodr_vocab_bad.txt").string();
  std::ofstream(path) << "apple\nbanana\n";
  REQUIRE_THROWS_AS(WordPieceVocab::load(path), ValidationError);
}

}  // namespace typodr
