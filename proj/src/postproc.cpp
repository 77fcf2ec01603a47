#include "qrelay/postproc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "qrelay/errors.hpp"

namespace qrelay {

double binary_entropy(double p) {
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

std::size_t oracle_leakage(std::size_t n, double qber) {
  return static_cast<std::size_t>(
      std::ceil(1.2 * static_cast<double>(n) * binary_entropy(qber)));
}

QberEstimate estimate_qber(const BitKey& key_a, const BitKey& key_b,
                           double sample_fraction, RandomStream& rng) {
  if (key_a.size() != key_b.size())
    throw InvariantError("estimate_qber: key length mismatch");
  if (sample_fraction <= 0.0 || sample_fraction >= 1.0)
    throw std::domain_error("estimate_qber: sample_fraction must be in (0, 1)");
  const std::size_t n = key_a.size();
  const auto sample_count =
      static_cast<std::size_t>(static_cast<double>(n) * sample_fraction);
  if (sample_count == 0) throw InvariantError("estimate_qber: empty sample");

  // partial Fisher-Yates picks sample_count distinct positions
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  for (std::size_t i = 0; i < sample_count; ++i) {
    const std::size_t j = i + rng.uniform_below(n - i);
    std::swap(idx[i], idx[j]);
  }

  QberEstimate est;
  est.disclosed_positions.assign(idx.begin(),
                                 idx.begin() + static_cast<std::ptrdiff_t>(sample_count));
  std::sort(est.disclosed_positions.begin(), est.disclosed_positions.end());

  std::size_t mismatches = 0;
  for (const std::size_t pos : est.disclosed_positions)
    if (key_a[pos] != key_b[pos]) ++mismatches;
  est.qber = static_cast<double>(mismatches) / static_cast<double>(sample_count);

  est.trimmed_a.owner = key_a.owner;
  est.trimmed_b.owner = key_b.owner;
  est.trimmed_a.stage = est.trimmed_b.stage = KeyStage::Estimated;
  est.trimmed_a.bits.reserve(n - sample_count);
  est.trimmed_b.bits.reserve(n - sample_count);
  std::size_t next_disclosed = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (next_disclosed < est.disclosed_positions.size() &&
        est.disclosed_positions[next_disclosed] == i) {
      ++next_disclosed;
      continue;
    }
    est.trimmed_a.bits.push_back(key_a[i]);
    est.trimmed_b.bits.push_back(key_b[i]);
  }
  return est;
}

BitKey apply_corrections(const BitKey& key, const CorrectionLog& log) {
  BitKey out = key;
  out.stage = KeyStage::Corrected;
  for (const auto& [pos, bit] : log.assignments) {
    if (pos >= out.bits.size())
      throw InvariantError("apply_corrections: position out of range");
    out.bits[pos] = bit;
  }
  return out;
}

namespace {

CorrectionResult oracle_reconcile(const BitKey& key_a, const BitKey& key_b) {
  const std::size_t n = key_a.size();
  CorrectionResult result;
  result.corrected = key_b;
  result.corrected.stage = KeyStage::Corrected;

  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (key_a[i] != key_b[i]) {
      ++mismatches;
      result.corrected.bits[i] = key_a[i];
      result.log.assignments.emplace_back(i, key_a[i]);
    }
  }
  const double qber = n == 0 ? 0.0 : static_cast<double>(mismatches) / static_cast<double>(n);
  result.report.estimated_qber = qber;
  result.report.disclosed_bits = result.log.assignments.size();
  result.report.leakage_bits = oracle_leakage(n, qber);
  result.report.corrected_length = n;
  result.report.residual_errors = 0;
  return result;
}

std::uint8_t parity_over(std::span<const Bit> bits, std::span<const std::size_t> positions) {
  std::uint8_t p = 0;
  for (const std::size_t pos : positions) p ^= bits[pos];
  return p;
}

// inter-pass shuffles come from a fixed stream so the protocol path is
// reproducible without an rng argument
constexpr std::uint64_t kShuffleSeed = 0x70617269747900ull;

CorrectionResult parity_bisect(const BitKey& key_a, const BitKey& key_b,
                               const ParityBisectOptions& options) {
  const std::size_t n = key_a.size();
  CorrectionResult result;
  result.corrected = key_b;
  result.corrected.stage = KeyStage::Corrected;
  result.report.corrected_length = n;
  if (n == 0) return result;

  const std::size_t initial_mismatches = hamming_distance(key_a, key_b);
  const double qber = static_cast<double>(initial_mismatches) / static_cast<double>(n);
  result.report.estimated_qber = qber;

  std::size_t block = options.initial_block;
  if (block == 0) {
    const double p = std::max(qber, 1.0 / static_cast<double>(n));
    block = static_cast<std::size_t>(std::ceil(0.73 / p));
  }
  block = std::clamp<std::size_t>(block, 1, n);

  std::size_t parities = 0;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  for (std::size_t pass = 0; pass < options.max_passes; ++pass) {
    if (pass > 0) {
      // a repeated full-key block would disclose a parity already known
      if (block >= n) break;
      RandomStream shuffle_rng(RandomStream::derive_seed(kShuffleSeed, pass));
      for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = shuffle_rng.uniform_below(i + 1);
        std::swap(order[i], order[j]);
      }
    }

    for (std::size_t start = 0; start < n; start += block) {
      const std::size_t len = std::min(block, n - start);
      const std::span<const std::size_t> positions(order.data() + start, len);
      ++parities;
      if (parity_over(key_a.bits, positions) == parity_over(result.corrected.bits, positions))
        continue;
      const auto [pos, used] = parity_locate(key_a.bits, result.corrected.bits, positions);
      parities += used;
      result.corrected.bits[pos] = key_a[pos];
      result.log.assignments.emplace_back(pos, key_a[pos]);
    }
    block = std::min(block * 2, n);
  }

  result.report.disclosed_bits = parities;
  result.report.leakage_bits = parities;
  result.report.residual_errors = hamming_distance(key_a, result.corrected);
  return result;
}

}  // namespace

std::pair<std::size_t, std::size_t> parity_locate(std::span<const Bit> a,
                                                  std::span<const Bit> b,
                                                  std::span<const std::size_t> positions) {
  std::size_t lo = 0;
  std::size_t hi = positions.size();
  std::size_t parities = 0;
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo + 1) / 2;
    const auto first = positions.subspan(lo, mid - lo);
    ++parities;
    if (parity_over(a, first) != parity_over(b, first))
      hi = mid;
    else
      lo = mid;
  }
  return {positions[lo], parities};
}

CorrectionResult error_correct(const BitKey& key_a, const BitKey& key_b, EcMode mode,
                               const ParityBisectOptions& options) {
  if (key_a.size() != key_b.size())
    throw InvariantError("error_correct: key length mismatch");
  return mode == EcMode::OracleEC ? oracle_reconcile(key_a, key_b)
                                  : parity_bisect(key_a, key_b, options);
}

TwoStepResult two_step_correct(const BitKey& alice, const BitKey& carol, const BitKey& bob) {
  if (alice.size() != carol.size() || alice.size() != bob.size())
    throw InvariantError("two_step_correct: key length mismatch");

  const double end_to_end_qber =
      alice.empty() ? 0.0
                    : static_cast<double>(hamming_distance(alice, bob)) /
                          static_cast<double>(alice.size());

  // pass 1: Carol reconciled to Alice, Bob replays the published corrections
  CorrectionResult pass1 = error_correct(alice, carol, EcMode::OracleEC);
  BitKey bob_after_pass1 = apply_corrections(bob, pass1.log);

  // pass 2: Bob reconciled to Alice, Carol replays (a no-op by then)
  CorrectionResult pass2 = error_correct(alice, bob_after_pass1, EcMode::OracleEC);
  BitKey carol_final = apply_corrections(pass1.corrected, pass2.log);

  TwoStepResult result;
  result.alice = alice;
  result.alice.stage = KeyStage::Corrected;
  result.carol = std::move(carol_final);
  result.bob = std::move(pass2.corrected);
  result.report.estimated_qber = end_to_end_qber;
  result.report.disclosed_bits = pass1.report.disclosed_bits + pass2.report.disclosed_bits;
  result.report.leakage_bits = pass1.report.leakage_bits + pass2.report.leakage_bits;
  result.report.corrected_length = alice.size();
  result.report.residual_errors = 0;
  return result;
}

namespace {

std::vector<std::uint64_t> pack_bits(std::span<const Bit> bits, std::size_t pad_words) {
  std::vector<std::uint64_t> words((bits.size() + 63) / 64 + pad_words, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i]) words[i / 64] |= std::uint64_t{1} << (i % 64);
  return words;
}

}  // namespace

BitKey privacy_amplify(const BitKey& key, std::size_t leakage,
                       std::size_t safety_margin, std::uint64_t seed) {
  const std::size_t in_len = key.size();
  if (leakage + safety_margin >= in_len)
    throw KeyExhaustedError("privacy_amplify: leakage plus margin leaves no output");
  const std::size_t out_len = in_len - leakage - safety_margin;

  // Toeplitz matrix T[i][j] = stripe[(out_len - 1) - i + j]; row i is a
  // contiguous window of the stripe, so rows are extracted by word shifts.
  RandomStream rng(seed);
  std::vector<Bit> stripe(in_len + out_len - 1);
  for (auto& bit : stripe) bit = random_bit(rng);

  const std::vector<std::uint64_t> stripe_words = pack_bits(stripe, 1);
  const std::vector<std::uint64_t> key_words = pack_bits(key.bits, 1);
  const std::size_t n_key_words = (in_len + 63) / 64;

  BitKey out;
  out.owner = key.owner;
  out.stage = KeyStage::Final;
  out.bits.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    const std::size_t base = out_len - 1 - i;
    const std::size_t word = base / 64;
    const unsigned shift = static_cast<unsigned>(base % 64);
    std::uint64_t acc = 0;
    for (std::size_t w = 0; w < n_key_words; ++w) {
      std::uint64_t row = stripe_words[word + w] >> shift;
      if (shift != 0) row |= stripe_words[word + w + 1] << (64 - shift);
      acc ^= row & key_words[w];
    }
    out.bits[i] = static_cast<Bit>(std::popcount(acc) & 1);
  }
  return out;
}

double trent_residual_error(const BitKey& alice, const BitKey& trent, const BitKey& bob) {
  if (alice.size() != trent.size() || alice.size() != bob.size())
    throw InvariantError("trent_residual_error: key length mismatch");
  if (alice.empty()) return 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < alice.size(); ++i)
    if (trent[i] != alice[i] && bob[i] == alice[i]) ++count;
  return static_cast<double>(count) / static_cast<double>(alice.size());
}

}  // namespace qrelay
