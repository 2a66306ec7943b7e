#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace dsaee {

// SplitMix64 finalizer. Used to derive decorrelated child seeds.
std::uint64_t mix64(std::uint64_t x);

// Child seed for stream `index` of `parent`:
//   mix64(parent + 0x9E3779B97F4A7C15 * (index + 1)).
std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index);

// Deterministic random source. Distributions are implemented here rather
// than via <random> distribution objects, whose algorithms are left to the
// standard library vendor, so that seeded outputs are portable.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform();

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased uniform integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  // Standard normal via the Box-Muller transform.
  double normal();

  // Fisher-Yates, from the back.
  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const std::size_t j = index(i);
      std::swap(values[i - 1], values[j]);
    }
  }

  // `count` distinct positions drawn uniformly from [0, n), in draw order.
  std::vector<std::size_t> sample_without_replacement(std::size_t n,
                                                      std::size_t count);

 private:
  std::mt19937_64 engine_;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

}  // namespace dsaee
