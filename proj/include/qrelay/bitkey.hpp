#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "qrelay/qubit.hpp"

namespace qrelay {

// Pipeline position of a key.  Transitions are monotone:
// Sifted -> Estimated -> Corrected -> Final.
enum class KeyStage : std::uint8_t { Sifted = 0, Estimated, Corrected, Final };

const char* stage_name(KeyStage stage);

// An ordered bit string with provenance metadata.
struct BitKey {
  std::vector<Bit> bits;
  KeyStage stage = KeyStage::Sifted;
  std::string owner;

  std::size_t size() const { return bits.size(); }
  bool empty() const { return bits.empty(); }
  Bit operator[](std::size_t i) const { return bits[i]; }
  bool same_bits(const BitKey& o) const { return bits == o.bits; }
};

// Number of differing positions; throws InvariantError on length mismatch.
std::size_t hamming_distance(std::span<const Bit> a, std::span<const Bit> b);
inline std::size_t hamming_distance(const BitKey& a, const BitKey& b) {
  return hamming_distance(a.bits, b.bits);
}

std::vector<Bit> xor_bits(std::span<const Bit> a, std::span<const Bit> b);

// Hex rendering, 4 bits per digit, zero-padded on the left to whole digits.
std::string to_hex(std::span<const Bit> bits);

std::vector<Bit> random_bits(std::size_t n, RandomStream& rng);

}  // namespace qrelay
