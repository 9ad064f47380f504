#pragma once
// Small deterministic RNG used everywhere randomness is needed. Keeping the
// generator and the distribution mappings in-repo guarantees byte-identical
// streams across compilers and standard libraries.

#include <cmath>
#include <cstdint>
#include <string_view>

namespace radpath {

// splitmix64: tiny, well-mixed, and stable
struct Rng {
  uint64_t state;

  explicit Rng(uint64_t seed) : state(seed) {}

  uint64_t next() {
    uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // uniform in [0, n)
  uint64_t below(uint64_t n) { return n ? next() % n : 0; }

  // uniform in [0, 1)
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // standard normal via Box-Muller (fresh pair each call keeps the stream
  // position independent of call parity)
  double gaussian() {
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(6.283185307179586476925286766559 * u2);
  }
};

// FNV-1a, used to derive per-subject streams and to fingerprint feature
// dictionaries.
inline uint64_t fnv1a(std::string_view s) {
  uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  Rng r(seed ^ (0x9e3779b97f4a7c15ull * (stream + 1)));
  return r.next();
}

}  // namespace radpath
