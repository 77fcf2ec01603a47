#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "qrelay/bitkey.hpp"

namespace qrelay {

// h2(p) = -p log2 p - (1-p) log2(1-p), with h2(0) = h2(1) = 0.
double binary_entropy(double p);

// Entropic reconciliation charge: ceil(1.2 * n * h2(qber)).
std::size_t oracle_leakage(std::size_t n, double qber);

struct QberEstimate {
  double qber = 0.0;
  BitKey trimmed_a;  // sample positions removed, stage Estimated
  BitKey trimmed_b;
  std::vector<std::size_t> disclosed_positions;  // ascending
};

// Compares a uniformly random sample of positions and removes them from
// both keys.  Throws InvariantError on length mismatch or when the sample
// would be empty, std::domain_error for sample_fraction outside (0, 1).
QberEstimate estimate_qber(const BitKey& key_a, const BitKey& key_b,
                           double sample_fraction, RandomStream& rng);

enum class EcMode : std::uint8_t { OracleEC, ParityBisect };

struct ReconciliationReport {
  double estimated_qber = 0.0;
  std::size_t disclosed_bits = 0;
  std::size_t leakage_bits = 0;
  std::size_t corrected_length = 0;
  std::size_t residual_errors = 0;  // OracleEC: always 0
};

// What a reconciliation pass publishes: positional assignments
// (position, reference bit).  Applying an assignment is idempotent, so a
// listening third party can replay the pass on its own key.
struct CorrectionLog {
  std::vector<std::pair<std::size_t, Bit>> assignments;
};

BitKey apply_corrections(const BitKey& key, const CorrectionLog& log);

struct CorrectionResult {
  BitKey corrected;  // key_b reconciled towards key_a, stage Corrected
  ReconciliationReport report;
  CorrectionLog log;
};

struct ParityBisectOptions {
  std::size_t initial_block = 0;  // 0 = size from the observed mismatch rate
  std::size_t max_passes = 4;     // doubling stops once a block covers the key
};

// OracleEC: key_b becomes key_a position-wise; leakage is the entropic
// charge on the observed error rate.  ParityBisect: block-parity exchange
// with bisection; leakage counts disclosed parities; residual mismatches
// are possible and reported.  Throws InvariantError on length mismatch.
CorrectionResult error_correct(const BitKey& key_a, const BitKey& key_b, EcMode mode,
                               const ParityBisectOptions& options = {});

// Bisection step used by ParityBisect, exposed for verification: locates
// one mismatching position inside a block whose parities differ.  Returns
// the position and the number of parities it disclosed.
std::pair<std::size_t, std::size_t> parity_locate(std::span<const Bit> a,
                                                  std::span<const Bit> b,
                                                  std::span<const std::size_t> positions);

struct TwoStepResult {
  BitKey alice;
  BitKey carol;
  BitKey bob;
  ReconciliationReport report;
};

// Two-pass reconciliation for the three-party protocol: Alice<->Carol with
// Bob replaying the published corrections, then Alice<->Bob with Carol
// replaying.  Postcondition: all three keys are bitwise identical.
TwoStepResult two_step_correct(const BitKey& alice, const BitKey& carol, const BitKey& bob);

// Universal-hash compression: multiplication by a random binary Toeplitz
// matrix whose defining diagonal stripe is drawn from RandomStream(seed).
// Output length = input length - leakage - safety_margin; throws
// KeyExhaustedError when that is not positive.  Deterministic in
// (key, seed, lengths).
BitKey privacy_amplify(const BitKey& key, std::size_t leakage,
                       std::size_t safety_margin, std::uint64_t seed);

// Fraction of positions where trent differs from alice while bob agrees
// with alice.  Throws InvariantError on length mismatch.
double trent_residual_error(const BitKey& alice, const BitKey& trent, const BitKey& bob);

}  // namespace qrelay
