#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace pwg::rng {

// xoshiro256++ with splitmix64 seeding. Hand-rolled (instead of <random>
// engines) so that streams, draw order and sampler algorithms are pinned by
// this file alone: results are reproducible bit-for-bit across platforms and
// library versions for a given (seed, stream) pair.

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Xoshiro {
 public:
  // Substream rule: the generator for (seed, stream) is seeded by running
  // splitmix64 from seed + (stream+1)*golden_ratio and taking four outputs.
  // Distinct streams land in uncorrelated regions of the splitmix64 sequence,
  // so per-trial generators are independent and order-free: trial k may be
  // drawn on any thread at any time with identical results.
  explicit Xoshiro(std::uint64_t seed, std::uint64_t stream = 0) {
    std::uint64_t sm = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    for (auto& word : s_) word = splitmix64(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;  // forbidden state
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Uniform double in [0, 1) with 53 random bits.
inline double uniform(Xoshiro& gen) {
  return static_cast<double>(gen.next() >> 11) * 0x1.0p-53;
}

// Uniform in (0, 1]; safe as a log() argument.
inline double uniform_pos(Xoshiro& gen) {
  return (static_cast<double>(gen.next() >> 11) + 1.0) * 0x1.0p-53;
}

inline bool coin(Xoshiro& gen) { return (gen.next() >> 63) != 0; }

inline double exponential(Xoshiro& gen) { return -std::log(uniform_pos(gen)); }

// Standard normal via Box-Muller (no cached second value: pair use sites draw
// both explicitly, keeping the draw count per event fixed).
inline double normal(Xoshiro& gen) {
  double r = std::sqrt(2.0 * exponential(gen));
  double phi = 6.283185307179586476925287 * uniform(gen);
  return r * std::cos(phi);
}

// Geometric on {0,1,2,...} with P(k) = (1-q) q^k. The photon/phonon pair
// number from a two-mode-squeezing pulse follows this law with q = p/(1+p-p)
// ... i.e. with success ratio q supplied by the caller. Sampled by CDF
// inversion in a loop (exact, one uniform per draw).
inline int geometric(Xoshiro& gen, double q) {
  if (q <= 0.0) return 0;
  if (q >= 1.0) throw std::invalid_argument("geometric ratio must be < 1");
  double u = uniform(gen);
  int k = 0;
  double cdf_tail = 1.0;  // P(K >= k)
  while (true) {
    cdf_tail *= q;  // P(K >= k+1)
    if (u >= 1.0 - cdf_tail)
      ++k;
    else
      return k;
    if (k > 4096) return k;  // unreachable for physical q; stops runaway
  }
}

// Thermal (Bose-Einstein) occupation with mean nbar: geometric with
// q = nbar/(1+nbar).
inline int bose_einstein(Xoshiro& gen, double nbar) {
  if (nbar <= 0.0) return 0;
  return geometric(gen, nbar / (1.0 + nbar));
}

// Binomial by explicit Bernoulli trials; n is small (phonon numbers) so this
// is both exact and fast, and the draw count is deterministic given n.
inline int binomial(Xoshiro& gen, int n, double p) {
  int hits = 0;
  for (int i = 0; i < n; ++i)
    if (uniform(gen) < p) ++hits;
  return hits;
}

// Poisson by multiplicative inversion; mean is small (dark counts per trial).
inline int poisson(Xoshiro& gen, double mean) {
  if (mean <= 0.0) return 0;
  if (mean > 50.0) throw std::invalid_argument("poisson mean too large");
  double limit = std::exp(-mean);
  double prod = uniform_pos(gen);
  int k = 0;
  while (prod > limit) {
    prod *= uniform_pos(gen);
    ++k;
  }
  return k;
}

}  // namespace pwg::rng
