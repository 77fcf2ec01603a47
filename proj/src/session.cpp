#include "qrelay/session.hpp"

#include <algorithm>
#include <ostream>
#include <string>

#include "qrelay/errors.hpp"

namespace qrelay {

void SessionConfig::validate() const {
  if (n_rounds == 0) throw InvariantError("session: n_rounds must be positive");
  if (legs.size() != relay_count + 1)
    throw InvariantError("session: need exactly relay_count + 1 channel legs, got " +
                         std::to_string(legs.size()) + " for " +
                         std::to_string(relay_count) + " relays");
  for (const auto& leg : legs) leg.validate();
  attack.validate();
  if (!attack.is_null() && relay_count != 1)
    throw InvariantError("session: channel attack policies are defined for the "
                         "single-relay topology only");
  if (!attacked_legs.empty()) {
    if (attacked_legs.size() != legs.size())
      throw InvariantError("session: attacked_legs must have one flag per leg");
    if (!attack.is_null())
      throw InvariantError("session: attacked_legs and attack are mutually exclusive");
  }
  if (mode == SessionMode::MultiPartyCarol && relay_count != 1)
    throw InvariantError("session: multi-party mode requires exactly one relay");
}

const char* sift_status_name(SiftStatus s) {
  switch (s) {
    case SiftStatus::Kept: return "kept";
    case SiftStatus::DiscardedBasis: return "discarded-basis";
    case SiftStatus::DiscardedLoss: return "discarded-loss";
  }
  return "?";
}

SessionResult run_session(const SessionConfig& config) {
  config.validate();

  const std::size_t n_legs = config.legs.size();
  const bool policy_attack = !config.attack.is_null();
  const bool generic_attack = !config.attacked_legs.empty();
  const bool any_attack = policy_attack || generic_attack;

  RandomStream rng(config.seed);
  SessionResult result;
  result.transcript.reserve(config.n_rounds);

  for (std::size_t round = 0; round < config.n_rounds; ++round) {
    RoundRecord rec;
    rec.index = round;
    rec.alice_bit = random_bit(rng);
    rec.alice_basis = random_basis(rng);
    rec.relay_basis.reserve(config.relay_count);
    rec.relay_bit.reserve(config.relay_count);
    if (any_attack) rec.eve.reset(n_legs);

    QubitSymbol q = prepare(rec.alice_bit, rec.alice_basis);
    bool all_detected = true;
    bool bases_match = true;

    for (std::size_t leg = 0; leg < n_legs; ++leg) {
      // attack hook at the leg entry
      if (policy_attack && leg < 2) {
        q = apply_attack(config.attack, static_cast<int>(leg) + 1, q, rec.eve, rng);
      } else if (generic_attack && config.attacked_legs[leg]) {
        const Basis eve_basis = random_basis(rng);
        const InterceptResult r = intercept_resend(q, eve_basis, rng);
        rec.eve.basis[leg] = eve_basis;
        rec.eve.bit[leg] = r.outcome;
        q = r.resent;
      }

      q = transmit(q, config.legs[leg], rng);

      if (leg + 1 < n_legs) {
        // relay: basis drawn whether or not the photon arrives
        const Basis basis = random_basis(rng);
        rec.relay_basis.push_back(basis);
        if (config.relay_detectors)
          q = detect(q, config.legs[leg].detector_efficiency, rng);
        const Measurement m = measure(q, basis, rng);
        rec.relay_bit.push_back(m);
        // re-prepare the observed state in the measurement basis; no resend
        // for an absorbed photon
        q = m ? prepare(*m, basis) : QubitSymbol::lost();
        if (!m) all_detected = false;
        if (basis != rec.alice_basis) bases_match = false;
      } else {
        rec.bob_basis = random_basis(rng);
        q = detect(q, config.legs[leg].detector_efficiency, rng);
        rec.bob_bit = measure(q, rec.bob_basis, rng);
        if (!rec.bob_bit) all_detected = false;
        if (rec.bob_basis != rec.alice_basis) bases_match = false;
      }
    }

    if (any_attack && !rec.eve.basis.empty() && rec.eve.basis[0] &&
        *rec.eve.basis[0] == rec.alice_basis)
      rec.eve.information = 1;

    rec.status = !all_detected ? SiftStatus::DiscardedLoss
                 : bases_match ? SiftStatus::Kept
                               : SiftStatus::DiscardedBasis;
    if (rec.status == SiftStatus::Kept) ++result.stats.kept;
    if (all_detected) ++result.stats.detected;
    result.transcript.push_back(std::move(rec));
  }

  result.stats.rounds = config.n_rounds;
  result.stats.detected_fraction =
      static_cast<double>(result.stats.detected) / static_cast<double>(config.n_rounds);
  result.stats.kept_fraction =
      result.stats.detected == 0
          ? 0.0
          : static_cast<double>(result.stats.kept) / static_cast<double>(result.stats.detected);
  return result;
}

SiftedKeys relay_sift(const std::vector<RoundRecord>& transcript) {
  SiftedKeys keys;
  keys.alice.owner = "alice";
  keys.bob.owner = "bob";
  const std::size_t n_relays = transcript.empty() ? 0 : transcript.front().relay_basis.size();
  keys.relays.resize(n_relays);
  for (std::size_t i = 0; i < n_relays; ++i)
    keys.relays[i].owner = "relay" + std::to_string(i + 1);

  for (const auto& rec : transcript) {
    if (rec.status != SiftStatus::Kept) continue;
    keys.alice.bits.push_back(rec.alice_bit);
    for (std::size_t i = 0; i < n_relays; ++i)
      keys.relays[i].bits.push_back(*rec.relay_bit[i]);
    keys.bob.bits.push_back(*rec.bob_bit);
  }
  return keys;
}

const char* classification_name(SiftClassification c) {
  switch (c) {
    case SiftClassification::AllMatch: return "all-match";
    case SiftClassification::AliceCarol: return "alice-carol";
    case SiftClassification::CarolBob: return "carol-bob";
    case SiftClassification::Discard: return "discard";
  }
  return "?";
}

SiftClassification classify_bases(Basis alice, Basis carol, Basis bob) {
  if (alice == carol && carol == bob) return SiftClassification::AllMatch;
  if (alice == carol) return SiftClassification::AliceCarol;
  if (carol == bob) return SiftClassification::CarolBob;
  return SiftClassification::Discard;  // alice == bob != carol
}

double ClassificationSummary::fraction(SiftClassification c) const {
  if (classified_rounds == 0) return 0.0;
  return static_cast<double>(counts[static_cast<std::size_t>(c)]) /
         static_cast<double>(classified_rounds);
}

double ClassificationSummary::usable_fraction() const {
  if (classified_rounds == 0) return 0.0;
  return 1.0 - fraction(SiftClassification::Discard);
}

ClassificationSummary classify_rounds(const std::vector<RoundRecord>& transcript) {
  ClassificationSummary summary;
  for (const auto& rec : transcript) {
    if (rec.relay_basis.size() != 1)
      throw InvariantError("classify_rounds: single-relay transcripts only");
    if (rec.status == SiftStatus::DiscardedLoss) continue;
    const SiftClassification c =
        classify_bases(rec.alice_basis, rec.relay_basis[0], rec.bob_basis);
    summary.per_round.emplace_back(rec.index, c);
    ++summary.counts[static_cast<std::size_t>(c)];
    ++summary.classified_rounds;
  }
  return summary;
}

StatisticsReport observed_statistics(const std::vector<RoundRecord>& transcript) {
  std::size_t n = 0, bob_err = 0, trent_err = 0, twbr = 0, info = 0;
  for (const auto& rec : transcript) {
    if (rec.status != SiftStatus::Kept) continue;
    ++n;
    const bool bob_wrong = *rec.bob_bit != rec.alice_bit;
    if (bob_wrong) ++bob_err;
    if (!rec.relay_bit.empty()) {
      const bool trent_wrong = *rec.relay_bit[0] != rec.alice_bit;
      if (trent_wrong) ++trent_err;
      if (trent_wrong && !bob_wrong) ++twbr;
    }
    info += static_cast<std::size_t>(rec.eve.information);
  }
  StatisticsReport report;
  if (n == 0) return report;
  const auto dn = static_cast<double>(n);
  report.bob_qber = static_cast<double>(bob_err) / dn;
  report.trent_qber = static_cast<double>(trent_err) / dn;
  report.trent_wrong_bob_right = static_cast<double>(twbr) / dn;
  report.eve_information = static_cast<double>(info) / dn;
  return report;
}

void write_transcript(std::ostream& out, const std::vector<RoundRecord>& transcript) {
  const std::size_t n_relays = transcript.empty() ? 0 : transcript.front().relay_basis.size();
  out << "round,alice_basis,alice_bit";
  for (std::size_t i = 0; i < n_relays; ++i)
    out << ",relay" << (i + 1) << "_basis,relay" << (i + 1) << "_bit";
  out << ",bob_basis,bob_bit,sift_status\n";

  for (const auto& rec : transcript) {
    out << rec.index << ',' << basis_char(rec.alice_basis) << ','
        << static_cast<int>(rec.alice_bit);
    for (std::size_t i = 0; i < n_relays; ++i) {
      out << ',' << basis_char(rec.relay_basis[i]) << ',';
      if (rec.relay_bit[i]) out << static_cast<int>(*rec.relay_bit[i]);
    }
    out << ',' << basis_char(rec.bob_basis) << ',';
    if (rec.bob_bit) out << static_cast<int>(*rec.bob_bit);
    out << ',' << sift_status_name(rec.status) << '\n';
  }
}

}  // namespace qrelay
