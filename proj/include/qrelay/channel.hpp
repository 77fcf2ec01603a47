#pragma once

#include "qrelay/qubit.hpp"

namespace qrelay {

// One quantum channel leg.  detector_efficiency belongs to the measuring
// node at the receiving end of the leg; transmit() does not apply it, the
// receiver does, once, via detect().
struct ChannelSpec {
  double length_km = 0.0;
  double attenuation_db_per_km = 0.25;  // alpha
  double intrinsic_qber = 0.0;          // basis-preserving bit-flip probability
  double detector_efficiency = 1.0;     // probability the receiving detector fires

  // throws std::domain_error on out-of-range fields
  void validate() const;
};

// t = 10^(-alpha * d / 10).  Throws std::domain_error on negative inputs.
double transmission(double length_km, double attenuation_db_per_km);
double transmission(const ChannelSpec& spec);

// Loss then intrinsic noise.  A surviving qubit keeps its basis; with
// probability intrinsic_qber its bit flips.  Lost stays Lost.
QubitSymbol transmit(const QubitSymbol& q, const ChannelSpec& spec, RandomStream& rng);

// Detector gate at a measuring node: a prepared qubit is absorbed with
// probability 1 - efficiency.  Throws std::domain_error for efficiency
// outside (0, 1].
QubitSymbol detect(const QubitSymbol& q, double efficiency, RandomStream& rng);

}  // namespace qrelay
