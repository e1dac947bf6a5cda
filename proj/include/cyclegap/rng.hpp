#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <utility>

namespace cyclegap {

/// SplitMix64 finalizer. Used for seed derivation and stream splitting.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Order-sensitive hash of a word sequence: h = splitmix64(h ^ w) folded left
/// from 0. This is the published per-trial seed derivation.
constexpr std::uint64_t hash64(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0;
  for (std::uint64_t w : words) h = splitmix64(h ^ w);
  return h;
}

/// Seedable, splittable random source ("mt19937_64/splitmix").
///
/// The engine is the standard-specified mt19937_64, so streams are identical
/// across standard libraries. Distributions are implemented here rather than
/// via <random> because the std distributions are implementation-defined.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }
  result_type operator()() { return engine_(); }

  /// Uniform on the open interval (0, 1).
  double uniform_open01() {
    for (;;) {
      const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
      if (u > 0.0) return u;
    }
  }

  /// Uniform on [0, n) without modulo bias. Requires n > 0.
  std::uint64_t uniform_index(std::uint64_t n) {
    const std::uint64_t limit = max() - (max() % n + 1) % n;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r <= limit) return r % n;
    }
  }

  /// Independent child stream; does not advance this generator.
  Rng split(std::uint64_t stream) const { return Rng(hash64({seed_, stream})); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

/// Fisher-Yates shuffle driven by Rng::uniform_index.
template <class T>
void shuffle(std::span<T> items, Rng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i));
    using std::swap;
    swap(items[i - 1], items[j]);
  }
}

}  // namespace cyclegap
