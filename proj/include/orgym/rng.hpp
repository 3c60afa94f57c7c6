// Deterministic random number generation.
//
// Everything downstream (benchmark files, episode records, reports) must be
// byte-identical for a given seed on any platform, so we cannot use the
// <random> distribution templates (their output is implementation-defined).
// Instead we ship a xoshiro256++ generator seeded through splitmix64 and a
// handful of hand-rolled distributions with fully pinned arithmetic.
//
// Named sub-streams derive independent generators from one master seed, so a
// single --seed flag reproduces an entire run while letting parallel workers
// draw from disjoint streams: stream(seed, "inject", type, slot, attempt).
#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace orgym {

// 64-bit FNV-1a. Used for sub-stream derivation and for content digests in
// run manifests; not cryptographic, collision-resistance is not required.
inline std::uint64_t fnv1a64(std::string_view bytes,
                             std::uint64_t h = 1469598103934665603ull) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) { reseed(seed); }

  void reseed(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64(sm);
  }

  // xoshiro256++ core step.
  std::uint64_t u64() {
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

  // Uniform double in [0, 1) with 53 random bits; exact on every platform.
  double uniform() { return static_cast<double>(u64() >> 11) * 0x1.0p-53; }

  // Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [lo, hi] via Lemire-style rejection-free multiply;
  // slight modulo bias is irrelevant here (ranges are tiny) but the result
  // is still fully deterministic.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(u64() % span);
  }

  // Bernoulli draw.
  bool chance(double p) { return uniform() < p; }

  // Deterministic Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j =
          static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Pick an index in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform_int(0, static_cast<std::int64_t>(n) - 1));
  }

  // Lowercase hex string of `digits` random hex characters.
  std::string hex(int digits) {
    static const char* kHex = "0123456789abcdef";
    std::string out;
    out.reserve(static_cast<std::size_t>(digits));
    std::uint64_t bits = 0;
    int have = 0;
    for (int i = 0; i < digits; ++i) {
      if (have == 0) {
        bits = u64();
        have = 16;
      }
      out.push_back(kHex[bits & 0xf]);
      bits >>= 4;
      --have;
    }
    return out;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
};

// Derives an independent stream seed from a master seed and a stream label.
// Extra integer tags distinguish per-slot / per-attempt streams.
inline std::uint64_t substream_seed(std::uint64_t master, std::string_view name,
                                    std::uint64_t a = 0, std::uint64_t b = 0,
                                    std::uint64_t c = 0) {
  // Chain the master and each tag through the splitmix64 finalizer so every
  // input avalanches across all 64 bits before the next folds in. The
  // finalizer is a bijection, so a two-stream collision needs a later tag to
  // cancel fully mixed state — unlike additive/xor folding, where small
  // (a, b, c) deltas cancel exactly and distinct slots share one stream, and
  // unlike folding the unmixed master, where (master+1, a) aliases
  // (master, a+1).
  std::uint64_t acc = fnv1a64(name);
  for (std::uint64_t tag : {master, a, b, c}) {
    std::uint64_t chained = acc + tag;
    acc = splitmix64(chained);
  }
  return acc;
}

// Same derivation, packaged as a ready generator.
inline Rng substream(std::uint64_t master, std::string_view name,
                     std::uint64_t a = 0, std::uint64_t b = 0,
                     std::uint64_t c = 0) {
  return Rng(substream_seed(master, name, a, b, c));
}

}  // namespace orgym
