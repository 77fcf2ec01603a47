#pragma once

#include <cstdint>

namespace qrelay {

// Deterministic randomness behind every stochastic choice in the simulator.
//
// xoshiro256** seeded through the splitmix64 finalizer.  The output sequence
// depends only on the 64-bit seed, never on the platform or the standard
// library, so two runs with equal seeds produce byte-identical transcripts.
//
// A stream is single-owner: never share one across concurrent sessions.
// Parallel work derives independent children with derive_seed().
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : seed_(seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) word = splitmix64(x);
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  bool next_bit() { return (next_u64() >> 63) != 0; }

  // uniform in [0,1), 53-bit resolution
  double next_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return next_real() < p; }

  // unbiased integer in [0, n); n >= 1
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t r = next_u64();
      const auto wide = static_cast<unsigned __int128>(r) * n;
      if (static_cast<std::uint64_t>(wide) >= threshold)
        return static_cast<std::uint64_t>(wide >> 64);
    }
  }

  std::uint64_t seed() const { return seed_; }

  // child seed = mix(mix(parent) + index + 1), mix = splitmix64 finalizer
  static std::uint64_t derive_seed(std::uint64_t parent, std::uint64_t index) {
    std::uint64_t x = parent;
    std::uint64_t mixed = splitmix64(x);
    x = mixed + index + 1;
    return splitmix64(x);
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  static std::uint64_t splitmix64(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t state_[4];
};

}  // namespace qrelay
