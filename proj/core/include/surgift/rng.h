#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace surgift {

// Deterministic, platform-independent generator (xoshiro256++ seeded via
// splitmix64). std::mt19937 distributions vary across standard libraries,
// which would break run_id-stable metrics, so randomness is self-contained.
inline uint64_t splitmix64_next(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

struct rng {
  uint64_t s[4];

  explicit rng(uint64_t seed = 0) {
    uint64_t sm = seed;
    for (auto& si : s) si = splitmix64_next(sm);
  }

  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t next_u64() {
    uint64_t result = rotl(s[0] + s[3], 23) + s[0];
    uint64_t t = s[1] << 17;
    s[2] ^= s[0];
    s[3] ^= s[1];
    s[1] ^= s[2];
    s[0] ^= s[3];
    s[2] ^= t;
    s[3] = rotl(s[3], 45);
    return result;
  }

  // uniform in [0, 1), 53-bit resolution
  double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

  // uniform integer in [0, bound)
  uint64_t below(uint64_t bound) { return next_u64() % bound; }

  // standard normal via Box-Muller; always draws a fresh pair (no cached
  // spare) so the value stream depends only on the call index
  double normal() {
    double u1 = uniform(), u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  std::vector<double> normal_vec(size_t n, double sigma = 1.0) {
    std::vector<double> out(n);
    for (auto& x : out) x = normal() * sigma;
    return out;
  }

  // Fisher-Yates permutation of 0..n-1
  std::vector<size_t> permutation(size_t n) {
    std::vector<size_t> p(n);
    for (size_t i = 0; i < n; ++i) p[i] = i;
    for (size_t i = n; i > 1; --i) {
      size_t j = below(i);
      std::swap(p[i - 1], p[j]);
    }
    return p;
  }
};

// stable 64-bit content hash (FNV-1a), used for run ids and stream splitting
inline uint64_t fnv1a64(const void* data, size_t len, uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64_str(const std::string& s, uint64_t h = 0xcbf29ce484222325ull) {
  return fnv1a64(s.data(), s.size(), h);
}

// derive an independent stream seed from a root seed and labeled indices
inline uint64_t derive_seed(uint64_t root, uint64_t a, uint64_t b = 0, uint64_t c = 0) {
  uint64_t st = root;
  splitmix64_next(st);
  st ^= 0x9e3779b97f4a7c15ull * (a + 1);
  splitmix64_next(st);
  st ^= 0xc2b2ae3d27d4eb4full * (b + 1);
  splitmix64_next(st);
  st ^= 0x165667b19e3779f9ull * (c + 1);
  return splitmix64_next(st);
}

}  // namespace surgift
