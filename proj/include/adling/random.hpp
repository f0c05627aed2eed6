#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <utility>
#include <vector>

namespace adling {

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

/// Seed of the named substream `name` under `root`. Every randomized
/// component draws from its own substream ("data", "init", "dropout",
/// "kmeans", "bootstrap", ...) so they can be varied independently.
std::uint64_t substream_seed(std::uint64_t root, std::string_view name);

/// Deterministic generator. The engine is mt19937_64 (its output sequence is
/// fixed by the standard); the distributions are implemented here rather than
/// taken from <random>, whose algorithms are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& items) {
    return items[below(items.size())];
  }

  Rng derive(std::string_view name) const { return Rng(substream_seed(seed_, name)); }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace adling
