#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace hybseq {

/// Seeded random generator with portable sampling. Only raw engine output is
/// used; the std::* distribution classes are implementation-defined and would
/// break byte-identical outputs across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next_u64() { return engine_(); }

  /// Unbiased integer in [0, n). n must be > 0.
  uint64_t below(uint64_t n) {
    const uint64_t limit = UINT64_MAX / n * n;
    uint64_t r;
    do {
      r = next_u64();
    } while (r >= limit);
    return r % n;
  }

  /// Inclusive integer range.
  int range(int lo, int hi) {
    return lo + static_cast<int>(below(static_cast<uint64_t>(hi - lo) + 1));
  }

  /// Double in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[below(i)]);
    }
  }

  /// Independent child stream; advances this generator once.
  Rng fork() { return Rng(next_u64() ^ 0x9e3779b97f4a7c15ull); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hybseq
