// Copyright 2026 The typodr Authors
// SPDX-License-Identifier: Apache-2.0
//
// Seedable, splittable PCG64 generator. All randomness in the project flows
// from one 64-bit seed through the sub-seed derivation below, so every
// artifact is reproducible across runs and platforms.

#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace typodr {

// PCG-XSL-RR 128/64 (O'Neill, pcg-random.org). State advances by an LCG on
// 128-bit state; output is a rotated xor-fold to 64 bits.
class Pcg64 {
 public:
  using result_type = std::uint64_t;

  explicit Pcg64(std::uint64_t seed = 0x853c49e6748fea9bULL) {
    state_ = 0;
    step();
    state_ += (static_cast<u128>(seed) << 64) | seed;
    step();
  }

  std::uint64_t next() {
    step();
    std::uint64_t xored = static_cast<std::uint64_t>(state_ >> 64) ^
                          static_cast<std::uint64_t>(state_);
    unsigned rot = static_cast<unsigned>(state_ >> 122);
    return (xored >> rot) | (xored << ((-rot) & 63u));
  }

  std::uint64_t operator()() { return next(); }
  static constexpr std::uint64_t min() { return 0; }
  static constexpr std::uint64_t max() { return ~0ULL; }

  // Uniform integer in [0, bound) without modulo bias.
  std::uint64_t bounded(std::uint64_t bound) {
    std::uint64_t threshold = (-bound) % bound;
    for (;;) {
      std::uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // Standard normal via Box-Muller (one draw discarded; simplicity over speed).
  double normal() {
    double u1, u2;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    u2 = uniform();
    constexpr double kTwoPi = 6.283185307179586476925286766559;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
  }

 private:
  using u128 = unsigned __int128;
  static constexpr u128 kMult =
      (static_cast<u128>(2549297995355413924ULL) << 64) | 4865540595714422341ULL;
  static constexpr u128 kInc =
      (static_cast<u128>(6364136223846793005ULL) << 64) | 1442695040888963407ULL;

  void step() { state_ = state_ * kMult + kInc; }

  u128 state_;
};

// 64-bit FNV-1a, the documented sub-seed derivation hash.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::uint64_t value, std::uint64_t h) {
  for (int i = 0; i < 8; ++i) {
    h ^= (value >> (8 * i)) & 0xff;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Sub-seed for (seed, replica, query_id): hash the three components in order.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t replica,
                                 std::string_view key) {
  std::uint64_t h = fnv1a64(seed, 0xcbf29ce484222325ULL);
  h = fnv1a64(replica, h);
  return fnv1a64(key, h);
}

}  // namespace typodr
