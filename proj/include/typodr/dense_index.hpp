// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Offline passage encoding, exact top-k dot-product search and encoding
// similarity. Brute force replaces ANN on purpose: at this corpus scale ANN
// error would confound the encoder comparison.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "typodr/encoder.hpp"
#include "typodr/errors.hpp"
#include "typodr/rng.hpp"

namespace typodr {

struct DenseIndex {
  int d_model = 0;
  std::vector<std::string> pids;
  std::vector<float> matrix;  // count x d_model, row-major
  std::uint64_t model_fingerprint = 0;

  std::size_t count() const { return pids.size(); }
  const float* row(std::size_t i) const { return matrix.data() + i * d_model; }
};

inline std::uint64_t file_fingerprint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open file for fingerprint: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[4096];
  while (is.read(buf, sizeof buf) || is.gcount() > 0)
    h = fnv1a64(std::string_view(buf, static_cast<std::size_t>(is.gcount())), h);
  return h;
}

template <typename T>
DenseIndex encode_collection(
    EncoderModel<T>& model,
    const std::vector<std::pair<std::string, std::string>>& collection,
    const WordPieceVocab* vocab = nullptr, std::uint64_t fingerprint = 0) {
  DenseIndex index;
  index.d_model = model.config.d_model;
  index.model_fingerprint = fingerprint;
  index.pids.reserve(collection.size());
  index.matrix.reserve(collection.size() * model.config.d_model);
  for (const auto& [pid, text] : collection) {
    std::vector<T> v = encode(text, model, vocab);
    index.pids.push_back(pid);
    for (T x : v) index.matrix.push_back(static_cast<float>(x));
  }
  return index;
}

// Exact top-k by dot product, descending, ties by ascending pid.
inline std::vector<std::pair<std::string, double>> search(
    const DenseIndex& index, const std::vector<float>& query, int k) {
  if (static_cast<int>(query.size()) != index.d_model)
    throw DimensionMismatch("query dimension does not match index");
  if (k < 1) throw ValidationError("k must be >= 1");
  std::vector<std::pair<double, std::size_t>> scored(index.count());
  for (std::size_t i = 0; i < index.count(); ++i) {
    const float* r = index.row(i);
    double s = 0;
    for (int c = 0; c < index.d_model; ++c)
      s += static_cast<double>(r[c]) * static_cast<double>(query[c]);
    scored[i] = {s, i};
  }
  auto cmp = [&](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first > b.first;
    return index.pids[a.second] < index.pids[b.second];
  };
  std::size_t take = std::min<std::size_t>(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + take, scored.end(), cmp);
  std::vector<std::pair<std::string, double>> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i)
    out.emplace_back(index.pids[scored[i].second], scored[i].first);
  return out;
}

template <typename T>
double encoding_similarity(const std::vector<T>& v1, const std::vector<T>& v2) {
  if (v1.size() != v2.size()) throw DimensionMismatch("vector lengths differ");
  double dot = 0, n1 = 0, n2 = 0;
  for (std::size_t i = 0; i < v1.size(); ++i) {
    dot += static_cast<double>(v1[i]) * static_cast<double>(v2[i]);
    n1 += static_cast<double>(v1[i]) * static_cast<double>(v1[i]);
    n2 += static_cast<double>(v2[i]) * static_cast<double>(v2[i]);
  }
  if (n1 == 0 || n2 == 0) throw ZeroVector("cosine of a zero vector");
  return dot / (std::sqrt(n1) * std::sqrt(n2));
}

// ---- persistence ("TGDX") -------------------------------------------------

inline void save_index(const DenseIndex& index, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write index: " + path);
  os.write("TGDX", 4);
  std::uint32_t version = 1;
  os.write(reinterpret_cast<const char*>(&version), 4);
  std::uint32_t d = static_cast<std::uint32_t>(index.d_model);
  os.write(reinterpret_cast<const char*>(&d), 4);
  std::uint64_t n = index.count();
  os.write(reinterpret_cast<const char*>(&n), 8);
  os.write(reinterpret_cast<const char*>(&index.model_fingerprint), 8);
  for (const auto& pid : index.pids) {
    std::uint32_t len = static_cast<std::uint32_t>(pid.size());
    os.write(reinterpret_cast<const char*>(&len), 4);
    os.write(pid.data(), len);
  }
  os.write(reinterpret_cast<const char*>(index.matrix.data()),
           static_cast<std::streamsize>(index.matrix.size() * sizeof(float)));
  if (!os) throw IoError("index write failed: " + path);
}

inline DenseIndex load_index(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open index: " + path);
  char magic[4];
  is.read(magic, 4);
  if (std::string(magic, 4) != "TGDX") throw IoError("bad index magic: " + path);
  std::uint32_t version = 0;
  is.read(reinterpret_cast<char*>(&version), 4);
  if (version != 1) throw IoError("unsupported index version: " + path);
  DenseIndex index;
  std::uint32_t d = 0;
  is.read(reinterpret_cast<char*>(&d), 4);
  index.d_model = static_cast<int>(d);
  std::uint64_t n = 0;
  is.read(reinterpret_cast<char*>(&n), 8);
  is.read(reinterpret_cast<char*>(&index.model_fingerprint), 8);
  index.pids.resize(n);
  for (auto& pid : index.pids) {
    std::uint32_t len = 0;
    is.read(reinterpret_cast<char*>(&len), 4);
    pid.resize(len);
    is.read(pid.data(), len);
  }
  index.matrix.resize(n * d);
  is.read(reinterpret_cast<char*>(index.matrix.data()),
          static_cast<std::streamsize>(index.matrix.size() * sizeof(float)));
  if (!is) throw IoError("truncated index: " + path);
  return index;
}

}  // namespace typodr
