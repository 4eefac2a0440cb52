// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0
//
// All measurement: per-query IR metrics (RR@10, RR@1000, R@1000, nDCG@10, AP),
// the MRR drop rate, replica averaging ("first per seed query, then across
// queries"), and the tokenization-difference binned analysis.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "typodr/errors.hpp"
#include "typodr/stats.hpp"
#include "typodr/tokenizer.hpp"

namespace typodr {

// grade in {0..3}; binary relevance = grade >= binarize_threshold
class Qrels {
 public:
  void add(const std::string& qid, const std::string& pid, int grade) {
    if (grade < 0 || grade > 3) throw ValidationError("grade out of range");
    grades_[qid][pid] = grade;
  }

  static Qrels load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open qrels: " + path);
    Qrels q;
    std::string qid, it, pid;
    int grade;
    while (in >> qid >> it >> pid >> grade) q.add(qid, pid, grade);
    return q;
  }

  void save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write qrels: " + path);
    for (const auto& [qid, docs] : grades_)
      for (const auto& [pid, g] : docs) os << qid << " 0 " << pid << ' ' << g << '\n';
  }

  bool has_query(const std::string& qid) const { return grades_.count(qid) > 0; }
  int grade(const std::string& qid, const std::string& pid) const {
    auto q = grades_.find(qid);
    if (q == grades_.end()) return 0;
    auto p = q->second.find(pid);
    return p == q->second.end() ? 0 : p->second;
  }
  const std::map<std::string, int>& judgments(const std::string& qid) const {
    return grades_.at(qid);
  }
  const std::map<std::string, std::map<std::string, int>>& all() const {
    return grades_;
  }

 private:
  std::map<std::string, std::map<std::string, int>> grades_;
};

struct RunFile {
  // per qid: (pid, score) in rank order
  std::map<std::string, std::vector<std::pair<std::string, double>>> rankings;
  std::string tag = "run";

  static RunFile load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open run: " + path);
    RunFile run;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream ls(line);
      std::string qid, q0, pid, tag;
      int rank;
      double score;
      if (!(ls >> qid >> q0 >> pid >> rank >> score >> tag))
        throw IoError("malformed run line: " + line);
      run.rankings[qid].emplace_back(pid, score);
      run.tag = tag;
    }
    return run;
  }

  void save(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot write run: " + path);
    char buf[64];
    for (const auto& [qid, ranking] : rankings) {
      for (std::size_t i = 0; i < ranking.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.6f", ranking[i].second);
        os << qid << " Q0 " << ranking[i].first << ' ' << (i + 1) << ' ' << buf
           << ' ' << tag << '\n';
      }
    }
  }
};

struct MetricReport {
  // metric name -> per-query values; queries in qids order
  std::vector<std::string> qids;
  std::map<std::string, std::vector<double>> per_query;

  double mean(const std::string& metric) const {
    const auto& v = per_query.at(metric);
    if (v.empty()) return 0.0;
    double s = 0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  }
};

inline const std::vector<std::string>& default_metrics() {
  static const std::vector<std::string> kMetrics = {"rr@10", "rr@1000", "r@1000",
                                                    "ndcg@10", "map"};
  return kMetrics;
}

namespace detail {

inline double reciprocal_rank(
    const std::vector<std::pair<std::string, double>>& ranking,
    const std::map<std::string, int>& judged, int threshold, int cutoff) {
  int limit = std::min<int>(cutoff, static_cast<int>(ranking.size()));
  for (int i = 0; i < limit; ++i) {
    auto it = judged.find(ranking[i].first);
    if (it != judged.end() && it->second >= threshold)
      return 1.0 / static_cast<double>(i + 1);
  }
  return 0.0;
}

inline double ndcg_at(const std::vector<std::pair<std::string, double>>& ranking,
                      const std::map<std::string, int>& judged, int k) {
  double dcg = 0;
  int limit = std::min<int>(k, static_cast<int>(ranking.size()));
  for (int i = 0; i < limit; ++i) {
    auto it = judged.find(ranking[i].first);
    int g = it == judged.end() ? 0 : it->second;
    dcg += static_cast<double>(g) / std::log2(static_cast<double>(i + 2));
  }
  std::vector<int> grades;
  for (const auto& [pid, g] : judged)
    if (g > 0) grades.push_back(g);
  std::sort(grades.rbegin(), grades.rend());
  double idcg = 0;
  for (int i = 0; i < std::min<int>(k, static_cast<int>(grades.size())); ++i)
    idcg += static_cast<double>(grades[i]) / std::log2(static_cast<double>(i + 2));
  return idcg == 0 ? 0.0 : dcg / idcg;
}

inline double average_precision(
    const std::vector<std::pair<std::string, double>>& ranking,
    const std::map<std::string, int>& judged, int threshold) {
  int total_relevant = 0;
  for (const auto& [pid, g] : judged)
    if (g >= threshold) ++total_relevant;
  if (total_relevant == 0) return 0.0;
  double sum = 0;
  int hits = 0;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    auto it = judged.find(ranking[i].first);
    if (it != judged.end() && it->second >= threshold) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(i + 1);
    }
  }
  return sum / static_cast<double>(total_relevant);
}

inline double recall_at(const std::vector<std::pair<std::string, double>>& ranking,
                        const std::map<std::string, int>& judged, int threshold,
                        int k) {
  int total_relevant = 0;
  for (const auto& [pid, g] : judged)
    if (g >= threshold) ++total_relevant;
  if (total_relevant == 0) return 0.0;
  int hits = 0;
  int limit = std::min<int>(k, static_cast<int>(ranking.size()));
  for (int i = 0; i < limit; ++i) {
    auto it = judged.find(ranking[i].first);
    if (it != judged.end() && it->second >= threshold) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(total_relevant);
}

}  // namespace detail

// Queries missing from the qrels are excluded (and counted in skipped).
// Binary metrics use grade >= binarize_threshold; nDCG uses the full grades.
inline MetricReport per_query_metrics(const RunFile& run, const Qrels& qrels,
                                      int binarize_threshold = 1,
                                      int* skipped = nullptr) {
  MetricReport report;
  for (const auto& m : default_metrics()) report.per_query[m] = {};
  int skip_count = 0;
  for (const auto& [qid, ranking] : run.rankings) {
    if (!qrels.has_query(qid)) {
      ++skip_count;
      continue;
    }
    const auto& judged = qrels.judgments(qid);
    report.qids.push_back(qid);
    report.per_query["rr@10"].push_back(
        detail::reciprocal_rank(ranking, judged, binarize_threshold, 10));
    report.per_query["rr@1000"].push_back(
        detail::reciprocal_rank(ranking, judged, binarize_threshold, 1000));
    report.per_query["r@1000"].push_back(
        detail::recall_at(ranking, judged, binarize_threshold, 1000));
    report.per_query["ndcg@10"].push_back(detail::ndcg_at(ranking, judged, 10));
    report.per_query["map"].push_back(
        detail::average_precision(ranking, judged, binarize_threshold));
  }
  if (skipped) *skipped = skip_count;
  return report;
}

// Delta_MRR = sum(RR(q_i) - RR(q'_i)) / sum RR(q_i), paired by qid.
inline double mrr_drop_rate(const std::vector<double>& clean_rr,
                            const std::vector<double>& typo_rr) {
  if (clean_rr.size() != typo_rr.size())
    throw DimensionMismatch("paired RR vectors differ in length");
  double num = 0, den = 0;
  for (std::size_t i = 0; i < clean_rr.size(); ++i) {
    if (clean_rr[i] == 0.0) continue;  // contributes 0 to both sums
    num += clean_rr[i] - typo_rr[i];
    den += clean_rr[i];
  }
  if (den == 0.0) throw AllZeroDenominator("all clean RR values are zero");
  return num / den;
}

// Per seed query: mean over replicas first, then the caller averages across
// queries. Every replica must cover the same qid set.
inline MetricReport replica_average(const std::vector<MetricReport>& replicas) {
  if (replicas.empty()) throw ValidationError("no replicas");
  const auto& qids = replicas[0].qids;
  for (const auto& rep : replicas)
    if (rep.qids != qids)
      throw ReplicaMismatch("replicas cover different query sets");
  MetricReport out;
  out.qids = qids;
  for (const auto& [metric, _] : replicas[0].per_query) {
    std::vector<double> avg(qids.size(), 0.0);
    for (const auto& rep : replicas) {
      const auto& v = rep.per_query.at(metric);
      for (std::size_t i = 0; i < v.size(); ++i) avg[i] += v[i];
    }
    for (auto& x : avg) x /= static_cast<double>(replicas.size());
    out.per_query[metric] = std::move(avg);
  }
  return out;
}

// ---- binned analysis by tokenization difference -----------------------------

struct BinRow {
  int difference = 0;
  std::int64_t count = 0;
  double delta_mrr = 0;
  double cosine_mean = 0;
  double cosine_sd = 0;
};

struct PairObservation {
  int difference = 0;  // tokenization difference of the pair
  double clean_rr = 0;
  double typo_rr = 0;
  double cosine = 0;
};

// Bins 1..max_bin reported; larger differences dropped (their count is
// returned via dropped, when given).
inline std::vector<BinRow> bin_by_token_difference(
    const std::vector<PairObservation>& observations, int max_bin = 5,
    std::int64_t* dropped = nullptr) {
  std::map<int, std::vector<const PairObservation*>> bins;
  std::int64_t drop_count = 0;
  for (const auto& obs : observations) {
    if (obs.difference >= 1 && obs.difference <= max_bin)
      bins[obs.difference].push_back(&obs);
    else
      ++drop_count;
  }
  std::vector<BinRow> rows;
  for (const auto& [diff, members] : bins) {
    BinRow row;
    row.difference = diff;
    row.count = static_cast<std::int64_t>(members.size());
    std::vector<double> clean_rr, typo_rr;
    double cos_sum = 0;
    for (const auto* m : members) {
      clean_rr.push_back(m->clean_rr);
      typo_rr.push_back(m->typo_rr);
      cos_sum += m->cosine;
    }
    try {
      row.delta_mrr = mrr_drop_rate(clean_rr, typo_rr);
    } catch (const AllZeroDenominator&) {
      row.delta_mrr = 0.0;
    }
    row.cosine_mean = cos_sum / static_cast<double>(members.size());
    double ss = 0;
    for (const auto* m : members)
      ss += (m->cosine - row.cosine_mean) * (m->cosine - row.cosine_mean);
    row.cosine_sd = members.size() > 1
                        ? std::sqrt(ss / static_cast<double>(members.size() - 1))
                        : 0.0;
    rows.push_back(row);
  }
  if (dropped) *dropped = drop_count;
  return rows;
}

}  // namespace typodr
