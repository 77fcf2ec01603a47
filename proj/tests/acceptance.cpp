// Acceptance suite: one pass/fail line per criterion.  Monte Carlo checks
// use 4-sigma binomial tolerances at the stated sample sizes.

#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "qrelay/adversary.hpp"
#include "qrelay/network.hpp"
#include "qrelay/postproc.hpp"
#include "qrelay/scenario.hpp"
#include "qrelay/session.hpp"
#include "qrelay/xor_relay.hpp"

namespace fs = std::filesystem;
using namespace qrelay;

namespace {

int failures = 0;

void criterion(int number, const std::string& description, bool pass) {
  std::printf("criterion %2d  %-68s  %s\n", number, description.c_str(),
              pass ? "PASS" : "FAIL");
  if (!pass) ++failures;
}

bool within_sigma(double observed, double expected, std::size_t n, double sigmas,
                  const char* label) {
  const double sigma = std::sqrt(expected * (1.0 - expected) / static_cast<double>(n));
  const bool ok = sigma == 0.0 ? observed == expected
                               : std::abs(observed - expected) <= sigmas * sigma;
  if (!ok)
    std::fprintf(stderr, "    %s: observed %.6g, expected %.6g +- %.2g\n", label,
                 observed, expected, sigmas * sigma);
  return ok;
}

SessionConfig single_relay_config(const AttackPolicy& policy, std::size_t rounds,
                                  std::uint64_t seed, double d1 = 0.0, double d2 = 0.0) {
  SessionConfig config;
  config.n_rounds = rounds;
  config.relay_count = 1;
  config.legs.resize(2);
  config.legs[0].intrinsic_qber = d1;
  config.legs[1].intrinsic_qber = d2;
  config.attack = policy;
  config.seed = seed;
  return config;
}

// sifted keys truncated to exactly n bits; rounds are sized so the sift
// yields enough with near-certainty
SiftedKeys sifted_sample(const AttackPolicy& policy, std::size_t n, std::uint64_t seed,
                         double d1 = 0.0, double d2 = 0.0) {
  const std::size_t rounds = n * 9 / 2;
  const SessionResult result =
      run_session(single_relay_config(policy, rounds, seed, d1, d2));
  SiftedKeys keys = relay_sift(result.transcript);
  if (keys.alice.size() < n) return keys;
  keys.alice.bits.resize(n);
  keys.bob.bits.resize(n);
  for (auto& relay : keys.relays) relay.bits.resize(n);
  return keys;
}

double key_qber(const BitKey& a, const BitKey& b) {
  return static_cast<double>(hamming_distance(a, b)) / static_cast<double>(a.size());
}

// --------------------------------------------------------------------------

bool criterion_sift_rate() {
  bool ok = true;
  const std::size_t n = 100000;
  std::uint64_t seed = 101;
  for (std::size_t relays = 0; relays <= 4; ++relays) {
    SessionConfig config;
    config.n_rounds = n;
    config.relay_count = relays;
    config.legs.resize(relays + 1);
    config.seed = seed++;
    const SessionResult result = run_session(config);
    const double expected = std::pow(2.0, -static_cast<double>(relays + 1));
    ok = within_sigma(result.stats.kept_fraction, expected, n, 4.0, "kept fraction") && ok;
  }
  return ok;
}

bool criterion_single_channel_attack() {
  bool ok = true;
  const std::size_t n = 100000;
  for (const auto& policy : {AttackPolicy::ch1(), AttackPolicy::ch2()}) {
    const SiftedKeys keys = sifted_sample(policy, n, 201 + policy.channel2);
    if (keys.alice.size() != n) {
      std::fprintf(stderr, "    too few sifted bits: %zu\n", keys.alice.size());
      return false;
    }
    ok = within_sigma(key_qber(keys.alice, keys.bob), 0.25, n, 4.0, "sifted QBER") && ok;
  }
  return ok;
}

bool criterion_dual_independent() {
  const std::size_t n = 100000;
  const SiftedKeys keys = sifted_sample(AttackPolicy::both_independent(), n, 301);
  if (keys.alice.size() != n) return false;

  bool ok = within_sigma(key_qber(keys.alice, keys.bob), 0.375, n, 4.0, "Bob QBER");
  ok = within_sigma(trent_residual_error(keys.alice, keys.relays[0], keys.bob), 0.0625, n,
                    4.0, "Trent-wrong-Bob-right") &&
       ok;

  const StatisticsReport exact = exact_statistics(AttackPolicy::both_independent(), 0.0, 0.0);
  ok = std::abs(exact.bob_qber - 0.375) <= 1e-15 && ok;
  ok = std::abs(exact.trent_wrong_bob_right - 0.0625) <= 1e-15 && ok;
  // the error-share composition: 25% + 18.75% - 6.25% = 37.5%, exactly
  ok = exact.trent_qber == 0.25 && ok;
  ok = (0.25 + 0.1875 - 0.0625 == exact.bob_qber) && ok;
  return ok;
}

bool criterion_dual_correlated() {
  const std::size_t n = 100000;
  const SiftedKeys keys = sifted_sample(AttackPolicy::both_reuse(), n, 401);
  if (keys.alice.size() != n) return false;

  bool ok = within_sigma(key_qber(keys.alice, keys.bob), 0.25, n, 4.0, "Bob QBER");
  ok = within_sigma(trent_residual_error(keys.alice, keys.relays[0], keys.bob), 0.125, n,
                    4.0, "Trent-wrong-Bob-right") &&
       ok;

  const StatisticsReport exact = exact_statistics(AttackPolicy::both_reuse(), 0.0, 0.0);
  ok = std::abs(exact.bob_qber - 0.25) <= 1e-15 && ok;
  ok = std::abs(exact.trent_wrong_bob_right - 0.125) <= 1e-15 && ok;
  return ok;
}

bool criterion_information_cap() {
  const double single = exact_statistics(AttackPolicy::ch1(), 0.0, 0.0).eve_information;
  const double dual =
      exact_statistics(AttackPolicy::both_independent(), 0.0, 0.0).eve_information;
  return std::abs(single - dual) <= 1e-12;
}

bool criterion_noise_composition() {
  const std::size_t n = 100000;
  const SiftedKeys keys = sifted_sample(AttackPolicy::none(), n, 601, 0.1, 0.1);
  if (keys.alice.size() != n) return false;
  return within_sigma(trent_residual_error(keys.alice, keys.relays[0], keys.bob), 0.01, n,
                      4.0, "Trent-wrong-Bob-right");
}

bool criterion_transmission_law() {
  const double t100 = transmission(100.0, 0.25);
  const double expected = std::pow(10.0, -2.5);
  bool ok = std::abs(t100 - expected) / expected <= 1e-12;

  RandomStream rng(701);
  for (int i = 0; i < 100; ++i) {
    const double total = rng.next_real() * 200.0;
    const double d1 = total * rng.next_real();
    const double whole = transmission(total, 0.25);
    const double split = transmission(d1, 0.25) * transmission(total - d1, 0.25);
    ok = (std::abs(split - whole) / whole <= 1e-12) && ok;
  }
  return ok;
}

bool criterion_classification() {
  const std::size_t n = 100000;
  SessionConfig config;
  config.n_rounds = n;
  config.relay_count = 1;
  config.legs.resize(2);
  config.seed = 801;
  const ClassificationSummary summary = classify_rounds(run_session(config).transcript);

  bool ok = summary.classified_rounds == n;
  for (const auto c : {SiftClassification::AllMatch, SiftClassification::AliceCarol,
                       SiftClassification::CarolBob, SiftClassification::Discard})
    ok = within_sigma(summary.fraction(c), 0.25, n, 4.0, classification_name(c)) && ok;
  ok = within_sigma(summary.usable_fraction(), 0.75, n, 4.0, "usable fraction") && ok;
  return ok;
}

bool criterion_two_step() {
  bool ok = true;
  std::uint64_t seed = 901;
  // independent leg noise
  for (int trial = 0; trial < 4; ++trial) {
    const SessionResult result =
        run_session(single_relay_config(AttackPolicy::none(), 100000, seed++, 0.03, 0.03));
    const SiftedKeys keys = relay_sift(result.transcript);
    const TwoStepResult two = two_step_correct(keys.alice, keys.relays[0], keys.bob);
    ok = two.alice.same_bits(two.carol) && two.alice.same_bits(two.bob) && ok;
  }
  // attack transcripts
  for (const auto& policy : {AttackPolicy::both_independent(), AttackPolicy::both_reuse(),
                             AttackPolicy::ch1()}) {
    const SessionResult result = run_session(single_relay_config(policy, 100000, seed++));
    const SiftedKeys keys = relay_sift(result.transcript);
    const TwoStepResult two = two_step_correct(keys.alice, keys.relays[0], keys.bob);
    ok = two.alice.same_bits(two.carol) && two.alice.same_bits(two.bob) && ok;
  }
  return ok;
}

bool criterion_trent_residual() {
  bool ok = true;
  const std::size_t n = 100000;
  std::uint64_t seed = 1001;
  for (const auto& policy : {AttackPolicy::both_independent(), AttackPolicy::both_reuse()}) {
    const SiftedKeys keys = sifted_sample(policy, n, seed++);
    if (keys.alice.size() != n) return false;
    const CorrectionResult ab = error_correct(keys.alice, keys.bob, EcMode::OracleEC);
    const BitKey trent_following = apply_corrections(keys.relays[0], ab.log);
    const double residual = key_qber(keys.alice, trent_following);
    const double expected = exact_statistics(policy, 0.0, 0.0).trent_wrong_bob_right;
    ok = residual > 0.0 && ok;
    ok = within_sigma(residual, expected, n, 4.0, "residual after following") && ok;
  }
  return ok;
}

bool criterion_xor_relay() {
  bool ok = true;
  RandomStream rng(1101);
  for (std::size_t relays = 1; relays <= 5; ++relays) {
    std::vector<BitKey> raw;
    std::size_t shortest = SIZE_MAX;
    for (std::size_t i = 0; i <= relays; ++i) {
      const std::size_t length = 80 + rng.uniform_below(120);
      shortest = std::min(shortest, length);
      BitKey key;
      key.bits = random_bits(length, rng);
      key.owner = "leg" + std::to_string(i + 1);
      raw.push_back(std::move(key));
    }

    const ChainKeys chain = truncate_to_common(std::move(raw));
    ok = chain.common_length == shortest && ok;

    const auto announcements = announce_xors(chain);
    const auto from_alice = recover_keys(chain.keys.front(), announcements, ChainEnd::Alice);
    const auto from_bob = recover_keys(chain.keys.back(), announcements, ChainEnd::Bob);
    ok = (from_alice == from_bob) && ok;

    const std::size_t margin = 16;
    const std::uint64_t hash_seed = 0xABCD + relays;
    const BitKey final_alice = finalize(from_alice, margin, hash_seed);
    const BitKey final_bob = finalize(from_bob, margin, hash_seed);
    ok = final_alice.same_bits(final_bob) && ok;
    // length L - margin, independent of the relay count
    ok = (final_alice.size() == shortest - margin) && ok;

    // every relay rebuilds the same final key from its own keys
    for (std::size_t relay = 1; relay <= relays; ++relay) {
      const auto rebuilt =
          recover_chain_from(relay, chain.keys[relay].bits, announcements);
      ok = finalize(rebuilt, margin, hash_seed).same_bits(final_alice) && ok;
    }
  }
  return ok;
}

bool criterion_topology() {
  TopologySpec spec;
  for (int t = 1; t <= 4; ++t) spec.trents.push_back("T" + std::to_string(t));
  for (int t = 1; t <= 4; ++t)
    for (int l = 1; l <= 3; ++l)
      spec.leaves.emplace_back("n" + std::to_string(t) + "_" + std::to_string(l),
                               spec.trents[static_cast<std::size_t>(t - 1)]);
  const TopologyGraph graph = build_topology(spec);

  bool ok = graph.mesh_link_count() == 6;
  for (const auto& a : graph.leaves()) {
    for (const auto& b : graph.leaves()) {
      if (a.name == b.name) continue;
      const Route r = route(graph, a.name, b.name);
      const std::size_t expected = a.home == b.home ? 1 : 2;
      ok = (r.relay_count() == expected) && ok;
    }
  }
  return ok;
}

bool criterion_reproducibility() {
  const std::string cli = QRELAY_CLI_PATH;
  const fs::path base =
      fs::temp_directory_path() / ("qrelay-acceptance-" + std::to_string(::getpid()));
  fs::remove_all(base);
  fs::create_directories(base);

  bool ok = true;
  const char* scenarios[] = {"fig2-attack-sweep", "sift-vs-relays", "xor-relay-chain"};
  for (const char* name : scenarios) {
    bool pair_ok = true;
    std::string body;
    for (int run = 0; run < 2; ++run) {
      const fs::path out = base / (std::string(name) + "-" + std::to_string(run));
      const std::string command =
          cli + " run " + name + " --out " + out.string() + " > /dev/null 2>&1";
      if (WEXITSTATUS(std::system(command.c_str())) != 0) {
        pair_ok = false;
        break;
      }
      std::ifstream in(out / (std::string(name) + "-stats.csv"), std::ios::binary);
      std::ostringstream content;
      content << in.rdbuf();
      if (run == 0)
        body = content.str();
      else
        pair_ok = !body.empty() && body == content.str();
    }
    if (!pair_ok) std::fprintf(stderr, "    %s: runs differ or failed\n", name);
    ok = pair_ok && ok;
  }
  fs::remove_all(base);
  return ok;
}

}  // namespace

int main() {
  criterion(1, "sift rate 2^-(N+1) for N = 0..4, lossless, n = 1e5", criterion_sift_rate());
  criterion(2, "single-channel intercept/resend: 25% sifted QBER (ch1 and ch2)",
            criterion_single_channel_attack());
  criterion(3, "dual independent attack: 37.5% Bob QBER, 6.25% Trent-wrong-Bob-right",
            criterion_dual_independent());
  criterion(4, "dual correlated attack: 25% Bob QBER, 12.5% Trent-wrong-Bob-right",
            criterion_dual_correlated());
  criterion(5, "attacking the second channel adds no information (exact, 1e-12)",
            criterion_information_cap());
  criterion(6, "channel noise composes: Trent-wrong-Bob-right = D1*D2 = 0.01",
            criterion_noise_composition());
  criterion(7, "transmission law 10^(-alpha*d/10) and distance-split composition",
            criterion_transmission_law());
  criterion(8, "basis-pattern classes are quarters; 3/4 of rounds usable",
            criterion_classification());
  criterion(9, "two-step correction makes alice = carol = bob, always",
            criterion_two_step());
  criterion(10, "Trent following Alice-Bob correction keeps a positive residual",
            criterion_trent_residual());
  criterion(11, "XOR relay: final length L - margin for N = 1..5; relays rebuild it",
            criterion_xor_relay());
  criterion(12, "4-trent mesh has 6 links; every route passes 1 or 2 trents",
            criterion_topology());
  criterion(13, "bundled scenarios rerun to byte-identical stats files",
            criterion_reproducibility());

  if (failures == 0)
    std::printf("all 13 acceptance criteria pass\n");
  else
    std::printf("%d acceptance criteria FAILED\n", failures);
  return failures;
}
