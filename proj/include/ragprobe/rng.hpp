#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace ragprobe {

// Deterministic RNG helpers. std::mt19937_64 output is fully specified by the
// standard; the std:: distributions are not, so sampling is done by hand here
// to keep seeded outputs byte-stable across toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n). n must be > 0. Rejection sampling, unbiased.
  uint64_t below(uint64_t n) {
    uint64_t threshold = (~n + 1) % n;  // 2^64 mod n
    while (true) {
      uint64_t r = engine_();
      if (r >= threshold) return r % n;
    }
  }

  /// Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace ragprobe
