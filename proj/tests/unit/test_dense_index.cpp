// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <fstream>

#include <catch2/catch_amalgamated.hpp>

#include "typodr/dense_index.hpp"
#include "typodr/rng.hpp"

namespace typodr {
namespace {

DenseIndex random_index(int n, int d, std::uint64_t seed) {
  DenseIndex index;
  index.d_model = d;
  Pcg64 rng(seed);
  for (int i = 0; i < n; ++i) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "p%04d", i);
    index.pids.push_back(buf);
    for (int c = 0; c < d; ++c)
      index.matrix.push_back(static_cast<float>(rng.normal()));
  }
  return index;
}

}  // namespace

TEST_CASE("search matches a naive full-scan oracle") {
  DenseIndex index = random_index(200, 8, 5);
  Pcg64 rng(6);
  std::vector<float> q(8);
  for (auto& x : q) x = static_cast<float>(rng.normal());

  std::vector<std::pair<std::string, double>> naive;
  for (std::size_t i = 0; i < index.count(); ++i) {
    double s = 0;
    for (int c = 0; c < 8; ++c) s += static_cast<double>(index.row(i)[c]) * q[c];
    naive.emplace_back(index.pids[i], s);
  }
  std::sort(naive.begin(), naive.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });

  auto got = search(index, q, 25);
  REQUIRE(got.size() == 25);
  for (int i = 0; i < 25; ++i) {
    REQUIRE(got[i].first == naive[i].first);
    REQUIRE(got[i].second == Catch::Approx(naive[i].second).margin(1e-9));
  }
}

TEST_CASE("top-k is a prefix of top-(k+n)") {
  DenseIndex index = random_index(100, 6, 9);
  std::vector<float> q(6, 0.3f);
  auto top5 = search(index, q, 5);
  auto top50 = search(index, q, 50);
  for (int i = 0; i < 5; ++i) REQUIRE(top5[i] == top50[i]);
}

TEST_CASE("score ties break by ascending pid") {
  DenseIndex index;
  index.d_model = 2;
  index.pids = {"z", "a", "m"};
  index.matrix = {1, 0, 1, 0, 1, 0};  // identical vectors
  auto got = search(index, {1.0f, 1.0f}, 3);
  REQUIRE(got[0].first == "a");
  REQUIRE(got[1].first == "m");
  REQUIRE(got[2].first == "z");
}

TEST_CASE("dimension mismatch and bad k are rejected") {
  DenseIndex index = random_index(10, 4, 1);
  REQUIRE_THROWS_AS(search(index, std::vector<float>(5, 0.f), 3),
                    DimensionMismatch);
  REQUIRE_THROWS_AS(search(index, std::vector<float>(4, 0.f), 0),
                    ValidationError);
}

TEST_CASE("cosine similarity oracle and zero-vector rejection") {
  std::vector<float> a = {1, 0, 0};
  std::vector<float> b = {0, 1, 0};
  std::vector<float> c = {2, 0, 0};
  REQUIRE(encoding_similarity(a, b) == Catch::Approx(0.0).margin(1e-12));
  REQUIRE(encoding_similarity(a, c) == Catch::Approx(1.0).margin(1e-12));
  std::vector<float> d = {3, 4, 0};
  // cos((1,0,0), (3,4,0)) = 3/5
  REQUIRE(encoding_similarity(a, d) == Catch::Approx(0.6).margin(1e-7));
  std::vector<float> z(3, 0.f);
  REQUIRE_THROWS_AS(encoding_similarity(a, z), ZeroVector);
}

TEST_CASE("index file round trip is bitwise identical") {
  namespace fs = std::filesystem;
  DenseIndex index = random_index(50, 16, 77);
  index.model_fingerprint = 0xdeadbeefULL;
  std::string p1 = (fs::temp_directory_path() / "typodr_d1.tgdx").string();
  std::string p2 = (fs::temp_directory_path() / "typodr_d2.tgdx").string();
  save_index(index, p1);
  DenseIndex loaded = load_index(p1);
  REQUIRE(loaded.d_model == index.d_model);
  REQUIRE(loaded.pids == index.pids);
  REQUIRE(loaded.matrix == index.matrix);
  REQUIRE(loaded.model_fingerprint == index.model_fingerprint);
  save_index(loaded, p2);
  std::ifstream f1(p1, std::ios::binary), f2(p2, std::ios::binary);
  std::string b1((std::istreambuf_iterator<char>(f1)), {});
  std::string b2((std::istreambuf_iterator<char>(f2)), {});
  REQUIRE(b1 == b2);
  fs::remove(p1);
  fs::remove(p2);
}

}  // namespace typodr
