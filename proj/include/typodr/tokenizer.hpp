// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0
//
// The two embedding front-end tokenizations: greedy longest-match WordPiece
// over a fixed vocab, and byte-level character codes (256 bytes + 6 specials
// = 262 ids). Also the tokenization-difference measure between the clean and
// typo version of a query.

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "typodr/errors.hpp"
#include "typodr/typo_gen.hpp"

namespace typodr {

inline constexpr const char* kUnkToken = "[UNK]";
inline constexpr const char* kClsToken = "[CLS]";
inline constexpr const char* kSepToken = "[SEP]";
inline constexpr const char* kPadToken = "[PAD]";
inline constexpr std::size_t kMaxWordPieceChars = 100;

class WordPieceVocab {
 public:
  WordPieceVocab() = default;

  explicit WordPieceVocab(const std::vector<std::string>& tokens) {
    for (const auto& t : tokens) add(t);
    require_specials();
  }

  // Standard vocab.txt layout: one token per line, line number = id.
  static WordPieceVocab load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open vocab file: " + path);
    WordPieceVocab v;
    std::string line;
    while (std::getline(in, line)) {
      if (!line.empty() && line.back() == '\r') line.pop_back();
      v.add(line);
    }
    v.require_specials();
    return v;
  }

  int id(std::string_view token) const {
    auto it = token_to_id_.find(std::string(token));
    return it == token_to_id_.end() ? -1 : it->second;
  }
  bool contains(std::string_view token) const { return id(token) >= 0; }
  const std::string& token(int id) const { return tokens_.at(id); }
  int size() const { return static_cast<int>(tokens_.size()); }
  int unk_id() const { return id(kUnkToken); }
  int cls_id() const { return id(kClsToken); }
  int sep_id() const { return id(kSepToken); }
  int pad_id() const { return id(kPadToken); }

 private:
  void add(const std::string& token) {
    if (token_to_id_.count(token))
      throw ValidationError("duplicate vocab token: " + token);
    token_to_id_[token] = static_cast<int>(tokens_.size());
    tokens_.push_back(token);
  }

  void require_specials() const {
    for (const char* t : {kUnkToken, kClsToken, kSepToken, kPadToken})
      if (!contains(t)) throw ValidationError(std::string("vocab missing ") + t);
  }

  std::vector<std::string> tokens_;
  std::unordered_map<std::string, int> token_to_id_;
};

struct TokenSequence {
  std::vector<std::string> tokens;
  std::vector<int> ids;
  // (word_index, first sub-token, one past last sub-token)
  struct Span {
    int word_index;
    int begin;
    int end;
  };
  std::vector<Span> spans;
};

// BERT-style pre-tokenization: lowercase, split on whitespace, split
// punctuation into separate words. ASCII-oriented; CJK and accent handling
// are out of scope.
inline std::vector<std::string> basic_tokenize(std::string_view text) {
  std::vector<std::string> words;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
  };
  for (unsigned char c : text) {
    if (std::isspace(c)) {
      flush();
    } else if (std::ispunct(c)) {
      flush();
      words.emplace_back(1, static_cast<char>(c));
    } else {
      cur += static_cast<char>(std::tolower(c));
    }
  }
  flush();
  return words;
}

// Greedy longest-match-first. A word with no match at any position becomes a
// single [UNK]; words over 100 characters map to [UNK] outright.
inline TokenSequence wordpiece_tokenize(const std::vector<std::string>& words,
                                        const WordPieceVocab& vocab) {
  TokenSequence seq;
  for (std::size_t w = 0; w < words.size(); ++w) {
    const std::string& word = words[w];
    int begin = static_cast<int>(seq.tokens.size());
    std::vector<std::string> pieces;
    bool bad = word.size() > kMaxWordPieceChars;
    std::size_t start = 0;
    while (!bad && start < word.size()) {
      std::size_t end = word.size();
      std::string match;
      while (start < end) {
        std::string candidate =
            (start > 0 ? "##" : "") + word.substr(start, end - start);
        if (vocab.contains(candidate)) {
          match = candidate;
          break;
        }
        --end;
      }
      if (match.empty()) {
        bad = true;
        break;
      }
      pieces.push_back(match);
      start = end;
    }
    if (bad) pieces = {kUnkToken};
    for (const auto& p : pieces) {
      seq.tokens.push_back(p);
      seq.ids.push_back(vocab.id(p));
    }
    seq.spans.push_back({static_cast<int>(w), begin,
                         static_cast<int>(seq.tokens.size())});
  }
  return seq;
}

inline TokenSequence wordpiece_tokenize(std::string_view text,
                                        const WordPieceVocab& vocab) {
  return wordpiece_tokenize(basic_tokenize(text), vocab);
}

// Character id space: 256 byte values + 6 specials = 262.
inline constexpr int kCharVocabSize = 262;
inline constexpr int kCharPad = 256;
inline constexpr int kCharBow = 257;
inline constexpr int kCharEow = 258;
inline constexpr int kCharCls = 259;
inline constexpr int kCharSep = 260;
inline constexpr int kCharMask = 261;
inline constexpr int kDefaultMaxWordChars = 16;

struct CharWordCodes {
  int max_word_length = kDefaultMaxWordChars;
  // words x max_word_length, row-major
  std::vector<std::vector<int>> codes;
};

inline std::vector<int> encode_word_chars(std::string_view word, int w) {
  std::vector<int> row(w, kCharPad);
  row[0] = kCharBow;
  int limit = w - 2;
  int n = static_cast<int>(std::min<std::size_t>(word.size(), limit));
  for (int i = 0; i < n; ++i) row[1 + i] = static_cast<unsigned char>(word[i]);
  row[1 + n] = kCharEow;
  return row;
}

inline std::vector<int> encode_special_word(int special_id, int w) {
  std::vector<int> row(w, kCharPad);
  row[0] = kCharBow;
  row[1] = special_id;
  row[2] = kCharEow;
  return row;
}

inline CharWordCodes char_encode(const std::vector<std::string>& words,
                                 int max_word_length = kDefaultMaxWordChars) {
  CharWordCodes out;
  out.max_word_length = max_word_length;
  out.codes.reserve(words.size());
  for (const auto& word : words)
    out.codes.push_back(encode_word_chars(word, max_word_length));
  return out;
}

// Number of typo-side tokens not matched one-to-one by equal tokens of the
// original sequence: |multiset(typo) \ multiset(orig)|.
inline int tokenization_difference(const TokenSequence& orig,
                                   const TokenSequence& typo) {
  std::map<std::string, int> budget;
  for (const auto& t : orig.tokens) ++budget[t];
  int diff = 0;
  for (const auto& t : typo.tokens) {
    auto it = budget.find(t);
    if (it != budget.end() && it->second > 0)
      --it->second;
    else
      ++diff;
  }
  return diff;
}

inline int tokenization_difference(std::string_view clean, std::string_view typo,
                                   const WordPieceVocab& vocab) {
  return tokenization_difference(wordpiece_tokenize(clean, vocab),
                                 wordpiece_tokenize(typo, vocab));
}

// Histogram over one replica of pairs.
inline std::map<int, std::int64_t> difference_histogram(
    const std::vector<QueryPair>& pairs, const WordPieceVocab& vocab) {
  std::map<int, std::int64_t> histogram;
  for (const auto& p : pairs)
    ++histogram[tokenization_difference(p.clean_text, p.typo_text, vocab)];
  return histogram;
}

// Per-difference average count across replicas.
inline std::map<int, double> difference_histogram_avg(
    const std::vector<std::vector<QueryPair>>& replicas,
    const WordPieceVocab& vocab) {
  std::map<int, double> avg;
  if (replicas.empty()) return avg;
  for (const auto& rep : replicas)
    for (const auto& [d, c] : difference_histogram(rep, vocab))
      avg[d] += static_cast<double>(c);
  for (auto& [d, c] : avg) c /= static_cast<double>(replicas.size());
  return avg;
}

}  // namespace typodr
