#pragma once

#include <cmath>
#include <cstdint>

namespace lqg {

// splitmix64 step; also used as the stateless (master_seed, index) mixer so that
// trial streams are reproducible in any execution order.
inline uint64_t splitmix64(uint64_t& s) {
  uint64_t z = (s += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline uint64_t mix_seed(uint64_t master, uint64_t index) {
  uint64_t s = master ^ (0x9e3779b97f4a7c15ull * (index + 1));
  uint64_t a = splitmix64(s);
  (void)splitmix64(s);
  return a ^ s;
}

// Deterministic generator (identical values on every platform/compiler, which is
// why std::normal_distribution is not used: its output is implementation-defined
// and derived values are frozen in tests).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() { return splitmix64(state_); }

  // uniform in (0,1)
  double uniform() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller with a cached spare.
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  uint64_t state_;
  double spare_ = 0;
  bool have_spare_ = false;
};

}  // namespace lqg
