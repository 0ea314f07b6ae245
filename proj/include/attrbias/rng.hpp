#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

namespace attrbias {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a(std::string_view text,
                              std::uint64_t hash = 0xCBF29CE484222325ull) noexcept {
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ull;
  }
  return hash;
}

constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t value) noexcept {
  return mix64(seed ^ mix64(value));
}

inline std::uint64_t derive_key(std::uint64_t seed, std::initializer_list<std::uint64_t> parts) {
  std::uint64_t key = mix64(seed);
  for (auto p : parts) key = hash_combine(key, p);
  return key;
}

// Counter-based generator: draw i of a stream with key K is
// mix64(K + i * 0x9E3779B97F4A7C15). Streams are addressed by key, so any
// unit of work (a group, a subject, a replicate) can derive its own stream
// without sharing state, and results do not depend on scheduling.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t key) noexcept : key_(key) {}

  std::uint64_t next_u64() noexcept {
    return mix64(key_ + (counter_++) * 0x9E3779B97F4A7C15ull);
  }

  // Uniform integer in [0, bound), bound >= 1. Rejection removes modulo bias.
  std::uint64_t uniform_below(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      std::uint64_t x = next_u64();
      if (x >= threshold) return x % bound;
    }
  }

  // Uniform double in [0,1) with 53 random bits.
  double uniform01() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) noexcept { return uniform01() < p; }

  // Standard normal via Box-Muller; the second variate is cached.
  double normal() noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// k distinct values from [0, population), uniformly, in draw order. Returns
// every value (in order) when k >= population.
std::vector<std::uint64_t> sample_without_replacement(CounterRng& rng, std::uint64_t population,
                                                      std::uint64_t k);

}  // namespace attrbias
