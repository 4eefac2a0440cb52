// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Inverted-index BM25 retrieval for hard-negative mining and the bag-of-words
// baseline. k1 = 0.9, b = 0.4, Lucene-style non-negative idf.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "typodr/errors.hpp"
#include "typodr/tokenizer.hpp"

namespace typodr {

struct Posting {
  int doc = 0;  // dense passage index, sorted ascending within a postings list
  int tf = 0;
};

class InvertedIndex {
 public:
  double k1 = 0.9;
  double b = 0.4;

  static InvertedIndex build(
      const std::vector<std::pair<std::string, std::string>>& collection,
      bool remove_stopwords = false) {
    InvertedIndex idx;
    idx.remove_stopwords_ = remove_stopwords;
    std::unordered_map<std::string, int> seen;
    for (const auto& [pid, text] : collection) {
      if (seen.count(pid)) throw DuplicatePid("duplicate passage id: " + pid);
      int doc = static_cast<int>(idx.pids_.size());
      seen[pid] = doc;
      idx.pids_.push_back(pid);
      std::map<std::string, int> tfs;
      int len = 0;
      for (const auto& term : idx.analyze(text)) {
        ++tfs[term];
        ++len;
      }
      idx.doc_lengths_.push_back(len);
      for (const auto& [term, tf] : tfs) idx.postings_[term].push_back({doc, tf});
    }
    double total = 0;
    for (int l : idx.doc_lengths_) total += l;
    idx.avgdl_ = idx.pids_.empty() ? 0.0 : total / idx.pids_.size();
    return idx;
  }

  std::vector<std::string> analyze(std::string_view text) const {
    std::vector<std::string> terms;
    for (auto& w : basic_tokenize(text)) {
      if (remove_stopwords_ && default_stopwords().count(w)) continue;
      terms.push_back(std::move(w));
    }
    return terms;
  }

  std::size_t doc_count() const { return pids_.size(); }
  const std::vector<std::string>& pids() const { return pids_; }

  double idf(const std::string& term) const {
    auto it = postings_.find(term);
    double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
    double n = static_cast<double>(pids_.size());
    return std::log(1.0 + (n - df + 0.5) / (df + 0.5));
  }

  // Standard BM25; descending score, ties broken by ascending pid.
  std::vector<std::pair<std::string, double>> search(std::string_view query,
                                                     int k) const {
    if (pids_.empty()) throw EmptyIndex("search on empty index");
    if (k < 1) throw ValidationError("k must be >= 1");
    std::unordered_map<int, double> scores;
    std::map<std::string, int> qtf;
    for (const auto& term : analyze(query)) ++qtf[term];
    for (const auto& [term, _] : qtf) {
      auto it = postings_.find(term);
      if (it == postings_.end()) continue;
      double w_idf = idf(term);
      for (const Posting& p : it->second) {
        double dl = doc_lengths_[p.doc];
        double norm = p.tf * (k1 + 1.0) /
                      (p.tf + k1 * (1.0 - b + b * dl / avgdl_));
        scores[p.doc] += w_idf * norm;
      }
    }
    std::vector<std::pair<std::string, double>> ranked;
    ranked.reserve(scores.size());
    for (const auto& [doc, s] : scores) ranked.emplace_back(pids_[doc], s);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b2) {
      if (a.second != b2.second) return a.second > b2.second;
      return a.first < b2.first;
    });
    if (static_cast<int>(ranked.size()) > k) ranked.resize(k);
    return ranked;
  }

  // ---- persistence ("TGIX") ----

  void save(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("cannot write index: " + path);
    os.write("TGIX", 4);
    write_u64(os, 1);  // version
    write_u64(os, pids_.size());
    for (std::size_t i = 0; i < pids_.size(); ++i) {
      write_str(os, pids_[i]);
      write_u64(os, static_cast<std::uint64_t>(doc_lengths_[i]));
    }
    write_u64(os, remove_stopwords_ ? 1 : 0);
    write_u64(os, postings_.size());
    for (const auto& [term, plist] : postings_) {
      write_str(os, term);
      write_u64(os, plist.size());
      for (const Posting& p : plist) {
        write_u64(os, static_cast<std::uint64_t>(p.doc));
        write_u64(os, static_cast<std::uint64_t>(p.tf));
      }
    }
  }

  static InvertedIndex load(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("cannot open index: " + path);
    char magic[4];
    is.read(magic, 4);
    if (std::string(magic, 4) != "TGIX") throw IoError("bad index magic: " + path);
    if (read_u64(is) != 1) throw IoError("unsupported index version");
    InvertedIndex idx;
    std::uint64_t n = read_u64(is);
    idx.pids_.resize(n);
    idx.doc_lengths_.resize(n);
    double total = 0;
    for (std::uint64_t i = 0; i < n; ++i) {
      idx.pids_[i] = read_str(is);
      idx.doc_lengths_[i] = static_cast<int>(read_u64(is));
      total += idx.doc_lengths_[i];
    }
    idx.avgdl_ = n == 0 ? 0.0 : total / static_cast<double>(n);
    idx.remove_stopwords_ = read_u64(is) != 0;
    std::uint64_t terms = read_u64(is);
    for (std::uint64_t t = 0; t < terms; ++t) {
      std::string term = read_str(is);
      std::uint64_t m = read_u64(is);
      auto& plist = idx.postings_[term];
      plist.resize(m);
      for (auto& p : plist) {
        p.doc = static_cast<int>(read_u64(is));
        p.tf = static_cast<int>(read_u64(is));
      }
    }
    if (!is) throw IoError("truncated index: " + path);
    return idx;
  }

 private:
  static void write_u64(std::ostream& os, std::uint64_t v) {
    os.write(reinterpret_cast<const char*>(&v), 8);
  }
  static std::uint64_t read_u64(std::istream& is) {
    std::uint64_t v = 0;
    is.read(reinterpret_cast<char*>(&v), 8);
    return v;
  }
  static void write_str(std::ostream& os, const std::string& s) {
    write_u64(os, s.size());
    os.write(s.data(), static_cast<std::streamsize>(s.size()));
  }
  static std::string read_str(std::istream& is) {
    std::string s(read_u64(is), '\0');
    is.read(s.data(), static_cast<std::streamsize>(s.size()));
    return s;
  }

  // std::map keeps term order deterministic for persistence
  std::map<std::string, std::vector<Posting>> postings_;
  std::vector<std::string> pids_;
  std::vector<int> doc_lengths_;
  double avgdl_ = 0;
  bool remove_stopwords_ = false;
};

}  // namespace typodr
