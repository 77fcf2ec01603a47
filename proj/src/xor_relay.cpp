#include "qrelay/xor_relay.hpp"

#include <algorithm>
#include <string>

#include "qrelay/errors.hpp"
#include "qrelay/postproc.hpp"
#include "qrelay/session.hpp"

namespace qrelay {

ChainKeys truncate_to_common(std::vector<BitKey> keys) {
  ChainKeys chain;
  if (keys.empty()) return chain;
  std::size_t shortest = keys.front().size();
  for (const auto& key : keys) shortest = std::min(shortest, key.size());
  for (auto& key : keys) {
    key.bits.erase(key.bits.begin(),
                   key.bits.begin() + static_cast<std::ptrdiff_t>(key.size() - shortest));
  }
  chain.keys = std::move(keys);
  chain.common_length = shortest;
  return chain;
}

ChainKeys establish_chain(std::span<const ChannelSpec> legs, const ChainParams& params,
                          ChainDiagnostics* diagnostics) {
  if (legs.size() < 2)
    throw InvariantError("establish_chain: a chain needs at least one relay (two legs)");

  std::vector<BitKey> keys;
  keys.reserve(legs.size());
  for (std::size_t i = 0; i < legs.size(); ++i) {
    SessionConfig leg_session;
    leg_session.n_rounds = params.rounds_per_leg;
    leg_session.relay_count = 0;
    leg_session.legs = {legs[i]};
    leg_session.seed = RandomStream::derive_seed(params.seed, i);

    const SessionResult run = run_session(leg_session);
    SiftedKeys sifted = relay_sift(run.transcript);
    if (static_cast<double>(sifted.alice.size()) * params.sample_fraction < 1.0)
      throw ChainError("establish_chain: leg " + std::to_string(i + 1) +
                       " produced too few sifted bits");

    RandomStream est_rng(RandomStream::derive_seed(leg_session.seed, 1));
    const QberEstimate est =
        estimate_qber(sifted.alice, sifted.bob, params.sample_fraction, est_rng);
    const CorrectionResult ec =
        error_correct(est.trimmed_a, est.trimmed_b, EcMode::OracleEC);
    if (diagnostics) {
      diagnostics->leg_kept_fraction.push_back(run.stats.kept_fraction);
      diagnostics->leg_estimated_qber.push_back(est.qber);
      diagnostics->leg_reports.push_back(ec.report);
    }

    BitKey leg_key;
    try {
      leg_key = privacy_amplify(ec.corrected, ec.report.leakage_bits,
                                params.safety_margin, RandomStream::derive_seed(leg_session.seed, 2));
    } catch (const KeyExhaustedError&) {
      throw ChainError("establish_chain: leg " + std::to_string(i + 1) +
                       " exhausted its key during privacy amplification");
    }
    leg_key.owner = "leg" + std::to_string(i + 1);
    keys.push_back(std::move(leg_key));
  }
  return truncate_to_common(std::move(keys));
}

std::vector<std::vector<Bit>> announce_xors(const ChainKeys& chain) {
  std::vector<std::vector<Bit>> announcements;
  if (chain.keys.size() < 2) return announcements;
  announcements.reserve(chain.keys.size() - 1);
  for (std::size_t i = 0; i + 1 < chain.keys.size(); ++i)
    announcements.push_back(xor_bits(chain.keys[i].bits, chain.keys[i + 1].bits));
  return announcements;
}

std::vector<std::vector<Bit>> recover_chain_from(std::size_t own_index,
                                                 std::span<const Bit> own_key,
                                                 std::span<const std::vector<Bit>> announcements) {
  const std::size_t n_keys = announcements.size() + 1;
  if (own_index >= n_keys)
    throw InvariantError("recover_chain_from: key index out of range");
  for (const auto& ann : announcements)
    if (ann.size() != own_key.size())
      throw InvariantError("recover_chain_from: announcement length mismatch");

  std::vector<std::vector<Bit>> keys(n_keys);
  keys[own_index].assign(own_key.begin(), own_key.end());
  for (std::size_t i = own_index; i + 1 < n_keys; ++i)
    keys[i + 1] = xor_bits(keys[i], announcements[i]);
  for (std::size_t i = own_index; i > 0; --i)
    keys[i - 1] = xor_bits(keys[i], announcements[i - 1]);
  return keys;
}

std::vector<std::vector<Bit>> recover_keys(const BitKey& own_key,
                                           std::span<const std::vector<Bit>> announcements,
                                           ChainEnd end) {
  const std::size_t own_index = end == ChainEnd::Alice ? 0 : announcements.size();
  return recover_chain_from(own_index, own_key.bits, announcements);
}

BitKey finalize(std::span<const std::vector<Bit>> recovered_keys,
                std::size_t safety_margin, std::uint64_t hash_seed) {
  if (recovered_keys.empty()) throw InvariantError("finalize: no keys");
  const std::size_t length = recovered_keys.front().size();
  for (const auto& key : recovered_keys)
    if (key.size() != length) throw InvariantError("finalize: unequal key lengths");

  BitKey concatenated;
  concatenated.owner = "chain";
  concatenated.stage = KeyStage::Corrected;
  concatenated.bits.reserve(recovered_keys.size() * length);
  for (const auto& key : recovered_keys)
    concatenated.bits.insert(concatenated.bits.end(), key.begin(), key.end());

  // announcements gave away N*L bits
  const std::size_t relays = recovered_keys.size() - 1;
  return privacy_amplify(concatenated, relays * length, safety_margin, hash_seed);
}

}  // namespace qrelay
