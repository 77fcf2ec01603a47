#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qrelay/qubit.hpp"

namespace qrelay {

// How Eve picks her measurement basis on the second channel when she
// attacks both legs of the single-relay scenario.
enum class BasisRule : std::uint8_t { IndependentRandom, ReuseChannel1Basis };

// Eve's strategy: which legs she intercepts and the basis rule.
// (false, false, *) is the null attack.
struct AttackPolicy {
  bool channel1 = false;  // Alice -> Trent
  bool channel2 = false;  // Trent -> Bob
  BasisRule basis_rule = BasisRule::IndependentRandom;

  static AttackPolicy none() { return {}; }
  static AttackPolicy ch1() { return {true, false, BasisRule::IndependentRandom}; }
  static AttackPolicy ch2() { return {false, true, BasisRule::IndependentRandom}; }
  static AttackPolicy both_independent() {
    return {true, true, BasisRule::IndependentRandom};
  }
  static AttackPolicy both_reuse() {
    return {true, true, BasisRule::ReuseChannel1Basis};
  }

  bool is_null() const { return !channel1 && !channel2; }

  // ReuseChannel1Basis requires both channel flags set.
  // Throws InvariantError otherwise.
  void validate() const;

  bool operator==(const AttackPolicy&) const = default;
};

// Policy <-> config name: none, ch1, ch2, both-independent, both-reuse.
std::string policy_name(const AttackPolicy& policy);
AttackPolicy policy_from_name(const std::string& name);  // throws ConfigError

// Per-round log of Eve's choices and outcomes, one slot per leg she may
// touch.  information uses the coarse per-round accounting: 1 exactly when
// her channel-1 basis matched Alice's, 0 otherwise.
struct EveRecord {
  std::vector<std::optional<Basis>> basis;
  std::vector<Measurement> bit;
  int information = 0;

  void reset(std::size_t legs) {
    basis.assign(legs, std::nullopt);
    bit.assign(legs, std::nullopt);
    information = 0;
  }
};

struct InterceptResult {
  Measurement outcome;
  QubitSymbol resent;
};

// Measure in `basis` and re-prepare whatever was observed; a lost qubit
// yields no detection and nothing is resent.
InterceptResult intercept_resend(const QubitSymbol& q, Basis basis, RandomStream& rng);

// Attack hook for leg 1 (Alice->Trent) or leg 2 (Trent->Bob).  When the
// policy covers the leg, draws Eve's basis per the basis rule, performs
// intercept/resend and logs it in round_state; otherwise passes q through.
// Throws std::logic_error when ReuseChannel1Basis is requested on leg 2
// before a leg-1 basis was recorded.
QubitSymbol apply_attack(const AttackPolicy& policy, int leg, const QubitSymbol& q,
                         EveRecord& round_state, RandomStream& rng);

// Sifted-key statistics for the single-relay pipeline, conditioned on the
// all-bases-match event.
struct StatisticsReport {
  double bob_qber = 0.0;               // Bob vs Alice
  double trent_qber = 0.0;             // Trent vs Alice
  double trent_wrong_bob_right = 0.0;  // Trent wrong while Bob agrees with Alice
  double eve_information = 0.0;        // bits per sifted bit
};

// Exact statistics by enumerating every discrete choice combination (Alice
// bit/basis, Eve bases, noise flips, Trent basis, Bob basis, every
// conjugate-measurement branch) weighted by probability.  d1 and d2 are the
// intrinsic QBERs of the two legs.  This enumeration is independent of the
// Monte Carlo pipeline and serves as its oracle.
// Throws std::domain_error when d1 or d2 lies outside [0, 1].
StatisticsReport exact_statistics(const AttackPolicy& policy, double d1, double d2);

}  // namespace qrelay
