#include "qrelay/bitkey.hpp"

#include "qrelay/errors.hpp"

namespace qrelay {

const char* stage_name(KeyStage stage) {
  switch (stage) {
    case KeyStage::Sifted: return "sifted";
    case KeyStage::Estimated: return "estimated";
    case KeyStage::Corrected: return "corrected";
    case KeyStage::Final: return "final";
  }
  return "?";
}

std::size_t hamming_distance(std::span<const Bit> a, std::span<const Bit> b) {
  if (a.size() != b.size())
    throw InvariantError("hamming_distance: length mismatch");
  std::size_t d = 0;
  for (std::size_t i = 0; i < a.size(); ++i) d += (a[i] != b[i]) ? 1u : 0u;
  return d;
}

std::vector<Bit> xor_bits(std::span<const Bit> a, std::span<const Bit> b) {
  if (a.size() != b.size()) throw InvariantError("xor_bits: length mismatch");
  std::vector<Bit> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    out[i] = static_cast<Bit>(a[i] ^ b[i]);
  return out;
}

std::string to_hex(std::span<const Bit> bits) {
  static const char* digits = "0123456789abcdef";
  const std::size_t n_digits = (bits.size() + 3) / 4;
  // bit 0 is the most significant bit of the string; pad on the left
  const std::size_t pad = n_digits * 4 - bits.size();
  std::vector<unsigned> nibbles(n_digits, 0);
  for (std::size_t i = 0; i < bits.size(); ++i) {
    const std::size_t pos = i + pad;
    nibbles[pos / 4] |= static_cast<unsigned>(bits[i]) << (3 - pos % 4);
  }
  std::string out(n_digits, '0');
  for (std::size_t i = 0; i < n_digits; ++i) out[i] = digits[nibbles[i]];
  return out;
}

std::vector<Bit> random_bits(std::size_t n, RandomStream& rng) {
  std::vector<Bit> out(n);
  for (auto& b : out) b = random_bit(rng);
  return out;
}

}  // namespace qrelay
