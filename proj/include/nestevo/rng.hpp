#pragma once

#include <cstdint>
#include <random>

namespace nestevo {

// splitmix64 finalizer; used for seed derivation and genome hashing.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) noexcept {
  return splitmix64(h ^ splitmix64(v));
}

/// Seeded random stream. Distribution helpers are implemented here rather
/// than through <random> distributions so outputs are identical across
/// standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % bound);
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % bound);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// p <= 0 never fires, p >= 1 always fires.
  bool bernoulli(double p) { return uniform01() < p; }

  /// Independent child stream, reproducible from (this stream's seed, salt).
  Rng fork(std::uint64_t salt) { return Rng(hash_combine(engine_(), salt)); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace nestevo
