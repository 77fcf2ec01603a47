#pragma once

#include <cassert>
#include <cstdint>
#include <optional>

#include "qrelay/rng.hpp"

namespace qrelay {

using Bit = std::uint8_t;

// The two conjugate preparation/measurement settings.
enum class Basis : std::uint8_t { X = 0, Y = 1 };

inline Basis other_basis(Basis b) { return b == Basis::X ? Basis::Y : Basis::X; }
inline char basis_char(Basis b) { return b == Basis::X ? 'X' : 'Y'; }

// A qubit in flight: Prepared(basis, bit) or Lost.
//
// The four BB84 states map onto (basis, bit) with the fixed encoding
// +x,+y -> 0 and -x,-y -> 1.  Intercept/resend physics never needs
// amplitudes, only the conjugate-basis-is-uniform rule, so the symbolic
// representation is exact.  Lost marks an absorbed photon; nothing
// downstream revives it.
class QubitSymbol {
 public:
  static QubitSymbol lost() { return QubitSymbol(); }

  static QubitSymbol prepared(Basis basis, Bit bit) {
    assert(bit <= 1);
    QubitSymbol q;
    q.lost_ = false;
    q.basis_ = basis;
    q.bit_ = bit;
    return q;
  }

  bool is_lost() const { return lost_; }

  Basis basis() const {
    assert(!lost_);
    return basis_;
  }

  Bit bit() const {
    assert(!lost_);
    return bit_;
  }

  bool operator==(const QubitSymbol& o) const {
    if (lost_ != o.lost_) return false;
    return lost_ || (basis_ == o.basis_ && bit_ == o.bit_);
  }

 private:
  QubitSymbol() = default;

  bool lost_ = true;
  Basis basis_ = Basis::X;
  Bit bit_ = 0;
};

inline QubitSymbol prepare(Bit bit, Basis basis) {
  return QubitSymbol::prepared(basis, bit);
}

// Empty optional = no detection.
using Measurement = std::optional<Bit>;

// Measuring in the preparation basis reproduces the bit deterministically;
// the conjugate basis yields a fresh uniform bit; a lost qubit gives no
// detection and consumes no randomness.
inline Measurement measure(const QubitSymbol& q, Basis basis, RandomStream& rng) {
  if (q.is_lost()) return std::nullopt;
  if (q.basis() == basis) return q.bit();
  return static_cast<Bit>(rng.next_bit() ? 1 : 0);
}

inline Basis random_basis(RandomStream& rng) {
  return rng.next_bit() ? Basis::Y : Basis::X;
}

inline Bit random_bit(RandomStream& rng) {
  return static_cast<Bit>(rng.next_bit() ? 1 : 0);
}

}  // namespace qrelay
