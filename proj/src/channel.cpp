#include "qrelay/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace qrelay {

void ChannelSpec::validate() const {
  if (length_km < 0.0) throw std::domain_error("channel length_km must be >= 0");
  if (attenuation_db_per_km < 0.0)
    throw std::domain_error("channel attenuation_db_per_km must be >= 0");
  if (intrinsic_qber < 0.0 || intrinsic_qber > 1.0)
    throw std::domain_error("channel intrinsic_qber must be in [0, 1]");
  if (detector_efficiency <= 0.0 || detector_efficiency > 1.0)
    throw std::domain_error("channel detector_efficiency must be in (0, 1]");
}

double transmission(double length_km, double attenuation_db_per_km) {
  if (length_km < 0.0) throw std::domain_error("transmission: length_km must be >= 0");
  if (attenuation_db_per_km < 0.0)
    throw std::domain_error("transmission: attenuation must be >= 0");
  return std::pow(10.0, -attenuation_db_per_km * length_km / 10.0);
}

double transmission(const ChannelSpec& spec) {
  return transmission(spec.length_km, spec.attenuation_db_per_km);
}

QubitSymbol transmit(const QubitSymbol& q, const ChannelSpec& spec, RandomStream& rng) {
  if (q.is_lost()) return q;
  const double t = transmission(spec);
  if (!rng.bernoulli(t)) return QubitSymbol::lost();
  if (spec.intrinsic_qber > 0.0 && rng.bernoulli(spec.intrinsic_qber))
    return QubitSymbol::prepared(q.basis(), static_cast<Bit>(q.bit() ^ 1u));
  return q;
}

QubitSymbol detect(const QubitSymbol& q, double efficiency, RandomStream& rng) {
  if (efficiency <= 0.0 || efficiency > 1.0)
    throw std::domain_error("detect: efficiency must be in (0, 1]");
  if (q.is_lost()) return q;
  if (efficiency < 1.0 && !rng.bernoulli(efficiency)) return QubitSymbol::lost();
  return q;
}

}  // namespace qrelay
