#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace fedsim {

// Mixes a sequence of 64-bit words into a single seed (splitmix64 finalizer).
// Used to derive independent per-client / per-round streams from a run seed
// without any dependence on draw order.
std::uint64_t mix_seed(std::initializer_list<std::uint64_t> words);

// Deterministic random source. Wraps std::mt19937_64 (whose output sequence
// is pinned by the standard) and implements its own distributions, so that
// identical seeds yield identical streams on every platform and toolchain.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Standard normal via polar Box-Muller; one cached value.
  double normal();

  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace fedsim
