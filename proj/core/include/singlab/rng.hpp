// SPDX-License-Identifier: MIT
#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace singlab::rng {

/// 64-bit finalizer from splitmix64. Bijective; good avalanche.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// FNV-1a over a stream label, used to separate named substreams.
constexpr std::uint64_t hash_label(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (char c : s) {
    h ^= static_cast<std::uint8_t>(c);
    h *= 0x100000001B3ULL;
  }
  return h;
}

/// Derive a child seed from a master seed and up to two integer coordinates
/// (e.g. sample size and replicate index). Order-independent scheduling of
/// sweep cells relies on this being a pure function of its arguments.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0) {
  return mix64(mix64(master ^ mix64(a)) ^ mix64(b ^ 0x5851F42D4C957F2DULL));
}

/// Counter-based generator: output i is mix64(key + i * odd-constant), so the
/// stream is random-access and identical on every platform with 64-bit
/// integers. No hidden global state; distributions below are hand-rolled so
/// results do not depend on a standard library's distribution algorithms.
class Counter {
 public:
  Counter(std::uint64_t seed, std::string_view stream)
      : key_(mix64(seed ^ hash_label(stream))) {}

  std::uint64_t next_u64() { return mix64(key_ + (++ctr_) * kStep); }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  /// Standard normal via Box-Muller; caches the second draw.
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    // u1 in (0,1] keeps the log finite.
    const double u1 = 1.0 - next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * 3.14159265358979323846 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  /// Uniform integer in [0, n) by rejection-free scaling (n << 2^64 here, so
  /// modulo bias is far below any quantity this lab measures;
  /// multiply-shift keeps it exact for n < 2^32 anyway).
  std::uint64_t next_below(std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static constexpr std::uint64_t kStep = 0x9E3779B97F4A7C15ULL;
  std::uint64_t key_;
  std::uint64_t ctr_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace singlab::rng
