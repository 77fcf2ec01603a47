#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "qrelay/errors.hpp"
#include "qrelay/session.hpp"

using namespace qrelay;

namespace {

SessionConfig lossless_config(std::size_t relays, std::size_t rounds, std::uint64_t seed) {
  SessionConfig config;
  config.n_rounds = rounds;
  config.relay_count = relays;
  config.legs.resize(relays + 1);
  config.seed = seed;
  return config;
}

}  // namespace

TEST_CASE("config invariants") {
  SessionConfig config = lossless_config(1, 100, 1);
  CHECK_NOTHROW(config.validate());

  SessionConfig short_legs = config;
  short_legs.legs.pop_back();
  CHECK_THROWS_AS(short_legs.validate(), InvariantError);

  SessionConfig no_rounds = config;
  no_rounds.n_rounds = 0;
  CHECK_THROWS_AS(no_rounds.validate(), InvariantError);

  SessionConfig attack_on_chain = lossless_config(2, 100, 1);
  attack_on_chain.attack = AttackPolicy::ch1();
  CHECK_THROWS_AS(attack_on_chain.validate(), InvariantError);

  SessionConfig mixed = lossless_config(1, 100, 1);
  mixed.attack = AttackPolicy::ch1();
  mixed.attacked_legs = {1, 0};
  CHECK_THROWS_AS(mixed.validate(), InvariantError);

  SessionConfig bad_flags = lossless_config(1, 100, 1);
  bad_flags.attacked_legs = {1};
  CHECK_THROWS_AS(bad_flags.validate(), InvariantError);

  SessionConfig carol_chain = lossless_config(3, 100, 1);
  carol_chain.mode = SessionMode::MultiPartyCarol;
  CHECK_THROWS_AS(carol_chain.validate(), InvariantError);
}

TEST_CASE("sift rate follows 2^-(N+1) for lossless chains") {
  const std::size_t n = 100000;
  std::uint64_t seed = 100;
  for (const std::size_t relays : {0u, 1u, 2u, 3u, 4u}) {
    const SessionResult result = run_session(lossless_config(relays, n, seed++));
    CHECK(result.stats.detected == n);
    const double expected = std::pow(2.0, -static_cast<double>(relays + 1));
    const double sigma = std::sqrt(expected * (1.0 - expected) / static_cast<double>(n));
    CHECK(std::abs(result.stats.kept_fraction - expected) <= 4.0 * sigma);
  }
}

TEST_CASE("spot checks of the stated sift fractions") {
  const std::size_t n = 100000;
  CHECK(std::abs(run_session(lossless_config(1, n, 5)).stats.kept_fraction - 0.25) <= 0.01);
  CHECK(std::abs(run_session(lossless_config(3, n, 6)).stats.kept_fraction - 0.0625) <= 0.005);
  CHECK(std::abs(run_session(lossless_config(0, n, 7)).stats.kept_fraction - 0.5) <= 0.01);
}

TEST_CASE("noise-free attack-free chains deliver identical sifted keys") {
  for (const std::size_t relays : {0u, 1u, 3u}) {
    const SessionResult result = run_session(lossless_config(relays, 20000, 8 + relays));
    const SiftedKeys keys = relay_sift(result.transcript);
    CHECK(keys.alice.size() == result.stats.kept);
    CHECK(keys.alice.same_bits(keys.bob));
    for (const auto& relay_key : keys.relays) CHECK(keys.alice.same_bits(relay_key));
  }
}

TEST_CASE("sifting keeps exactly the all-detected all-bases-equal rounds") {
  SessionConfig config = lossless_config(1, 20000, 9);
  config.legs[0].length_km = 6.0;  // some loss on leg 1
  const SessionResult result = run_session(config);
  std::size_t kept = 0;
  for (const auto& rec : result.transcript) {
    const bool detected = rec.bob_bit.has_value();
    if (!detected) {
      CHECK(rec.status == SiftStatus::DiscardedLoss);
      continue;
    }
    const bool match =
        rec.relay_basis[0] == rec.alice_basis && rec.bob_basis == rec.alice_basis;
    CHECK(rec.status == (match ? SiftStatus::Kept : SiftStatus::DiscardedBasis));
    if (match) ++kept;
  }
  CHECK(kept == result.stats.kept);
  const SiftedKeys keys = relay_sift(result.transcript);
  CHECK(keys.alice.size() == kept);
}

TEST_CASE("a relay that loses the photon resends nothing") {
  SessionConfig config = lossless_config(1, 30000, 10);
  config.legs[0].detector_efficiency = 0.4;
  const SessionResult result = run_session(config);
  for (const auto& rec : result.transcript)
    if (!rec.relay_bit[0].has_value()) CHECK(!rec.bob_bit.has_value());
}

TEST_CASE("detection fraction composes as t1*t2 with unit detectors") {
  SessionConfig config = lossless_config(1, 100000, 11);
  config.legs[0].length_km = 10.0;
  config.legs[1].length_km = 20.0;
  const double expected =
      transmission(config.legs[0]) * transmission(config.legs[1]);
  const SessionResult result = run_session(config);
  const double sigma =
      std::sqrt(expected * (1.0 - expected) / static_cast<double>(config.n_rounds));
  CHECK(std::abs(result.stats.detected_fraction - expected) <= 4.0 * sigma);
}

TEST_CASE("detector factors multiply into end-to-end survival") {
  SessionConfig config = lossless_config(1, 100000, 12);
  config.legs[0].length_km = 10.0;
  config.legs[0].detector_efficiency = 0.9;
  config.legs[1].length_km = 20.0;
  config.legs[1].detector_efficiency = 0.8;
  const double expected = transmission(config.legs[0]) * transmission(config.legs[1]) *
                          0.9 * 0.8;
  const SessionResult result = run_session(config);
  const double sigma =
      std::sqrt(expected * (1.0 - expected) / static_cast<double>(config.n_rounds));
  CHECK(std::abs(result.stats.detected_fraction - expected) <= 3.0 * sigma);

  // with relay detectors disabled only Bob's factor remains
  config.relay_detectors = false;
  config.seed = 13;
  const double expected_bob_only =
      transmission(config.legs[0]) * transmission(config.legs[1]) * 0.8;
  const SessionResult bob_only = run_session(config);
  const double sigma2 = std::sqrt(expected_bob_only * (1.0 - expected_bob_only) /
                                  static_cast<double>(config.n_rounds));
  CHECK(std::abs(bob_only.stats.detected_fraction - expected_bob_only) <= 3.0 * sigma2);
}

TEST_CASE("dual independent attack shows up as 37.5% sifted QBER") {
  SessionConfig config = lossless_config(1, 100000, 14);
  config.attack = AttackPolicy::both_independent();
  const SessionResult result = run_session(config);
  const SiftedKeys keys = relay_sift(result.transcript);
  const double qber = static_cast<double>(hamming_distance(keys.alice, keys.bob)) /
                      static_cast<double>(keys.alice.size());
  CHECK(std::abs(qber - 0.375) <= 0.01);
}

TEST_CASE("generalized per-leg interception works on longer chains") {
  SessionConfig config = lossless_config(2, 120000, 15);
  config.attacked_legs = {0, 1, 0};  // middle leg only
  const SessionResult result = run_session(config);
  const SiftedKeys keys = relay_sift(result.transcript);
  REQUIRE(keys.alice.size() > 5000);
  const double qber = static_cast<double>(hamming_distance(keys.alice, keys.bob)) /
                      static_cast<double>(keys.alice.size());
  const double sigma = std::sqrt(0.25 * 0.75 / static_cast<double>(keys.alice.size()));
  CHECK(std::abs(qber - 0.25) <= 4.0 * sigma);
}

TEST_CASE("basis-pattern classification matches the table") {
  CHECK(classify_bases(Basis::X, Basis::X, Basis::X) == SiftClassification::AllMatch);
  CHECK(classify_bases(Basis::X, Basis::X, Basis::Y) == SiftClassification::AliceCarol);
  CHECK(classify_bases(Basis::X, Basis::Y, Basis::X) == SiftClassification::Discard);
  CHECK(classify_bases(Basis::X, Basis::Y, Basis::Y) == SiftClassification::CarolBob);
  CHECK(classify_bases(Basis::Y, Basis::Y, Basis::Y) == SiftClassification::AllMatch);
  CHECK(classify_bases(Basis::Y, Basis::Y, Basis::X) == SiftClassification::AliceCarol);
  CHECK(classify_bases(Basis::Y, Basis::X, Basis::Y) == SiftClassification::Discard);
  CHECK(classify_bases(Basis::Y, Basis::X, Basis::X) == SiftClassification::CarolBob);
}

TEST_CASE("classification partitions lossless rounds into quarters") {
  const std::size_t n = 100000;
  const SessionResult result = run_session(lossless_config(1, n, 16));
  const ClassificationSummary summary = classify_rounds(result.transcript);
  CHECK(summary.classified_rounds == n);
  std::size_t total = 0;
  for (const auto c : {SiftClassification::AllMatch, SiftClassification::AliceCarol,
                       SiftClassification::CarolBob, SiftClassification::Discard}) {
    CHECK(std::abs(summary.fraction(c) - 0.25) <= 0.01);
    total += summary.counts[static_cast<std::size_t>(c)];
  }
  CHECK(total == summary.classified_rounds);  // exact partition
  CHECK(std::abs(summary.usable_fraction() - 0.75) <= 0.01);
}

TEST_CASE("classification rejects other topologies") {
  const SessionResult direct = run_session(lossless_config(0, 100, 17));
  CHECK_THROWS_AS(classify_rounds(direct.transcript), InvariantError);
  const SessionResult chain = run_session(lossless_config(2, 100, 18));
  CHECK_THROWS_AS(classify_rounds(chain.transcript), InvariantError);
}

TEST_CASE("equal seeds give byte-identical transcripts") {
  SessionConfig config = lossless_config(1, 5000, 19);
  config.legs[0].length_km = 3.0;
  config.legs[0].intrinsic_qber = 0.02;
  config.attack = AttackPolicy::both_reuse();

  std::ostringstream first, second;
  write_transcript(first, run_session(config).transcript);
  write_transcript(second, run_session(config).transcript);
  CHECK(first.str() == second.str());
  CHECK(first.str().find("kept") != std::string::npos);
}
