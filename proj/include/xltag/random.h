#ifndef XLTAG_RANDOM_H_
#define XLTAG_RANDOM_H_

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace xltag {

// Seeded generator with portable derived draws. std::mt19937_64 output is
// fully specified by the standard; the distribution helpers below avoid the
// implementation-defined std::*_distribution classes so results are
// reproducible across standard libraries.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t next() { return engine_(); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be positive.
  uint64_t below(uint64_t n) {
    uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T> &items) {
    for (size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace xltag

#endif  // XLTAG_RANDOM_H_
