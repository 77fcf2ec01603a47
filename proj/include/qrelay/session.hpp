#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "qrelay/adversary.hpp"
#include "qrelay/bitkey.hpp"
#include "qrelay/channel.hpp"

namespace qrelay {

enum class SessionMode : std::uint8_t { TrustedRelay, MultiPartyCarol };

// One Alice -> relays -> Bob session.  legs holds relay_count + 1 channel
// specs in pipeline order.  `attack` is the single-relay scenario of the
// eavesdropping analysis; `attacked_legs` generalizes it to arbitrary legs
// of longer chains (independent bases only) and is mutually exclusive with
// a non-null `attack`.
struct SessionConfig {
  std::size_t n_rounds = 0;
  std::size_t relay_count = 0;  // N
  std::vector<ChannelSpec> legs;
  AttackPolicy attack;
  std::vector<std::uint8_t> attacked_legs;  // 1-based flags, size legs.size() or empty
  std::uint64_t seed = 0;
  SessionMode mode = SessionMode::TrustedRelay;
  bool relay_detectors = true;  // false: only Bob's detector is lossy

  void validate() const;  // throws InvariantError
};

enum class SiftStatus : std::uint8_t { Kept, DiscardedBasis, DiscardedLoss };

const char* sift_status_name(SiftStatus s);

// Full per-round transcript entry.
struct RoundRecord {
  std::size_t index = 0;
  Basis alice_basis = Basis::X;
  Bit alice_bit = 0;
  std::vector<Basis> relay_basis;   // size N
  std::vector<Measurement> relay_bit;
  Basis bob_basis = Basis::X;
  Measurement bob_bit;
  EveRecord eve;
  SiftStatus status = SiftStatus::DiscardedLoss;
};

struct SessionStats {
  std::size_t rounds = 0;
  std::size_t detected = 0;  // rounds where every party detected
  std::size_t kept = 0;
  double detected_fraction = 0.0;
  // Sift fractions are accounted over received qubits: kept / detected.
  double kept_fraction = 0.0;
};

struct SessionResult {
  std::vector<RoundRecord> transcript;
  SessionStats stats;
};

// Runs the round pipeline: Alice prepares a uniform (bit, basis); each leg
// applies the attack hook, then loss and intrinsic noise; each relay draws
// a fresh uniform basis, detects, measures and re-prepares the observed
// state in its measurement basis; Bob detects and measures last.
SessionResult run_session(const SessionConfig& config);

struct SiftedKeys {
  BitKey alice;
  std::vector<BitKey> relays;
  BitKey bob;
};

// Keeps exactly the rounds where every party detected and all bases agree;
// the emitted keys are aligned position-for-position.
SiftedKeys relay_sift(const std::vector<RoundRecord>& transcript);

// Four-way partition of loss-free single-relay rounds by basis pattern.
// AllMatch: A = C = B.  AliceCarol: A = C != B.  CarolBob: C = B != A.
// Discard: A = B != C.
enum class SiftClassification : std::uint8_t { AllMatch, AliceCarol, CarolBob, Discard };

const char* classification_name(SiftClassification c);

SiftClassification classify_bases(Basis alice, Basis carol, Basis bob);

struct ClassificationSummary {
  std::vector<std::pair<std::size_t, SiftClassification>> per_round;  // (round index, class)
  std::array<std::size_t, 4> counts{};  // indexed by SiftClassification
  std::size_t classified_rounds = 0;

  double fraction(SiftClassification c) const;
  double usable_fraction() const;  // non-Discard share
};

// Single-relay transcripts only; loss-discarded rounds are excluded first.
// Throws InvariantError for any other relay count.
ClassificationSummary classify_rounds(const std::vector<RoundRecord>& transcript);

// Monte Carlo counterpart of exact_statistics, computed over Kept rounds.
// Trent fields refer to the first relay; they are zero for direct sessions.
StatisticsReport observed_statistics(const std::vector<RoundRecord>& transcript);

// One record per line:
// round,alice_basis,alice_bit,relay<i>_basis,relay<i>_bit,...,bob_basis,bob_bit,sift_status
// with empty bit fields for lost qubits.
void write_transcript(std::ostream& out, const std::vector<RoundRecord>& transcript);

}  // namespace qrelay
