// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0
//
// File plumbing: TSV queries/collections, query-pair TSV, JSON-lines training
// sets, stopword lists.

#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "typodr/errors.hpp"
#include "typodr/training.hpp"
#include "typodr/typo_gen.hpp"

namespace typodr {

// `id<TAB>text` per line, UTF-8, LF.
inline std::vector<std::pair<std::string, std::string>> load_tsv_pairs(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open TSV file: " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto tab = line.find('\t');
    if (tab == std::string::npos) throw IoError("missing TAB in line: " + line);
    out.emplace_back(line.substr(0, tab), line.substr(tab + 1));
  }
  return out;
}

inline void save_tsv_pairs(
    const std::vector<std::pair<std::string, std::string>>& rows,
    const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write TSV file: " + path);
  for (const auto& [id, text] : rows) os << id << '\t' << text << '\n';
}

// `query_id<TAB>clean<TAB>typo<TAB>word_index<TAB>kind`
inline void save_query_pairs(const std::vector<QueryPair>& pairs,
                             const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write pair file: " + path);
  for (const auto& p : pairs)
    os << p.query_id << '\t' << p.clean_text << '\t' << p.typo_text << '\t'
       << p.word_index << '\t' << to_string(p.kind) << '\n';
}

inline std::vector<QueryPair> load_query_pairs(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pair file: " + path);
  std::vector<QueryPair> pairs;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::size_t start = 0;
    for (;;) {
      auto tab = line.find('\t', start);
      cols.push_back(line.substr(start, tab - start));
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    if (cols.size() != 5) throw IoError("malformed pair line: " + line);
    QueryPair p;
    p.query_id = cols[0];
    p.clean_text = cols[1];
    p.typo_text = cols[2];
    p.word_index = std::stoi(cols[3]);
    p.kind = typo_kind_from_string(cols[4]);
    pairs.push_back(std::move(p));
  }
  return pairs;
}

inline std::set<std::string> load_stopwords(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open stopword file: " + path);
  std::set<std::string> words;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) words.insert(lowercase(line));
  }
  return words;
}

// JSON-lines: {"qid","query","pos":{"pid","text"},"negs":[{"pid","text"}...]}
inline void save_training_set(const std::vector<TrainingSample>& samples,
                              const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write training set: " + path);
  for (const auto& s : samples) {
    nlohmann::json j;
    j["qid"] = s.qid;
    j["query"] = s.query;
    j["pos"] = {{"pid", s.positive.pid}, {"text", s.positive.text}};
    auto& negs = j["negs"] = nlohmann::json::array();
    for (const auto& n : s.negatives)
      negs.push_back({{"pid", n.pid}, {"text", n.text}});
    os << j.dump() << '\n';
  }
}

inline std::vector<TrainingSample> load_training_set(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open training set: " + path);
  std::vector<TrainingSample> samples;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line);
    TrainingSample s;
    s.qid = j.at("qid").get<std::string>();
    s.query = j.at("query").get<std::string>();
    s.positive = {j.at("pos").at("pid").get<std::string>(),
                  j.at("pos").at("text").get<std::string>()};
    for (const auto& n : j.at("negs"))
      s.negatives.push_back(
          {n.at("pid").get<std::string>(), n.at("text").get<std::string>()});
    samples.push_back(std::move(s));
  }
  return samples;
}

}  // namespace typodr
