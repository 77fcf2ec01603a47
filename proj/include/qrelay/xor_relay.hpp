#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "qrelay/bitkey.hpp"
#include "qrelay/channel.hpp"
#include "qrelay/postproc.hpp"

namespace qrelay {

// Pairwise keys of a classical relay chain: key i is shared between node i
// and node i+1, node 0 = Alice, node N+1 = Bob.  All keys are truncated to
// the common length L.
struct ChainKeys {
  std::vector<BitKey> keys;  // N + 1 entries
  std::size_t common_length = 0;

  std::size_t relay_count() const { return keys.empty() ? 0 : keys.size() - 1; }
};

// Truncates every key to the length of the shortest by discarding the
// leading (high-order) bits, keeping the trailing L bits.
ChainKeys truncate_to_common(std::vector<BitKey> keys);

struct ChainParams {
  std::size_t rounds_per_leg = 0;
  double sample_fraction = 0.5;
  std::size_t safety_margin = 30;
  std::uint64_t seed = 0;
};

struct ChainDiagnostics {
  std::vector<double> leg_kept_fraction;
  std::vector<double> leg_estimated_qber;
  std::vector<ReconciliationReport> leg_reports;
};

// Runs one full direct point-to-point key-distribution session per leg
// (sift, estimate, reconcile, amplify) and truncates the resulting keys to
// a common length.  legs carries N+1 channel specs for an N-relay chain.
// Throws ChainError when any leg yields an empty key.
ChainKeys establish_chain(std::span<const ChannelSpec> legs, const ChainParams& params,
                          ChainDiagnostics* diagnostics = nullptr);

// Relay i announces key_i XOR key_{i+1}; returns the N announcements in
// chain order.
std::vector<std::vector<Bit>> announce_xors(const ChainKeys& chain);

enum class ChainEnd : std::uint8_t { Alice, Bob };

// Recovers every chain key from one end key plus the public announcements
// (chain order); the result is in chain order regardless of the end.
std::vector<std::vector<Bit>> recover_keys(const BitKey& own_key,
                                           std::span<const std::vector<Bit>> announcements,
                                           ChainEnd end);

// Same walk started from an arbitrary node position holding key
// `own_index` (relay i holds keys i-1 and i), so every relay can rebuild
// the full chain as well.
std::vector<std::vector<Bit>> recover_chain_from(std::size_t own_index,
                                                 std::span<const Bit> own_key,
                                                 std::span<const std::vector<Bit>> announcements);

// Concatenates all N+1 recovered keys and compresses with leakage N*L:
// the final key has length L - safety_margin, independent of N.
BitKey finalize(std::span<const std::vector<Bit>> recovered_keys,
                std::size_t safety_margin, std::uint64_t hash_seed);

}  // namespace qrelay
