#include "qrelay/adversary.hpp"

#include <array>
#include <stdexcept>

#include "qrelay/errors.hpp"

namespace qrelay {

void AttackPolicy::validate() const {
  if (basis_rule == BasisRule::ReuseChannel1Basis && !(channel1 && channel2))
    throw InvariantError("attack policy: ReuseChannel1Basis requires both channels attacked");
}

std::string policy_name(const AttackPolicy& policy) {
  if (policy.is_null()) return "none";
  if (policy.channel1 && policy.channel2)
    return policy.basis_rule == BasisRule::ReuseChannel1Basis ? "both-reuse"
                                                              : "both-independent";
  return policy.channel1 ? "ch1" : "ch2";
}

AttackPolicy policy_from_name(const std::string& name) {
  if (name == "none") return AttackPolicy::none();
  if (name == "ch1") return AttackPolicy::ch1();
  if (name == "ch2") return AttackPolicy::ch2();
  if (name == "both-independent") return AttackPolicy::both_independent();
  if (name == "both-reuse") return AttackPolicy::both_reuse();
  throw ConfigError("unknown attack policy '" + name +
                    "' (expected none, ch1, ch2, both-independent, both-reuse)");
}

InterceptResult intercept_resend(const QubitSymbol& q, Basis basis, RandomStream& rng) {
  const Measurement m = measure(q, basis, rng);
  if (!m) return {std::nullopt, QubitSymbol::lost()};
  return {m, QubitSymbol::prepared(basis, *m)};
}

QubitSymbol apply_attack(const AttackPolicy& policy, int leg, const QubitSymbol& q,
                         EveRecord& round_state, RandomStream& rng) {
  if (leg != 1 && leg != 2) throw std::logic_error("apply_attack: leg must be 1 or 2");
  const bool active = (leg == 1) ? policy.channel1 : policy.channel2;
  if (!active) return q;

  if (round_state.basis.size() < 2) round_state.reset(2);

  Basis eve_basis;
  if (leg == 2 && policy.basis_rule == BasisRule::ReuseChannel1Basis) {
    if (!round_state.basis[0])
      throw std::logic_error("apply_attack: ReuseChannel1Basis on leg 2 before leg 1");
    eve_basis = *round_state.basis[0];
  } else {
    eve_basis = random_basis(rng);
  }

  const InterceptResult r = intercept_resend(q, eve_basis, rng);
  round_state.basis[leg - 1] = eve_basis;
  round_state.bit[leg - 1] = r.outcome;
  return r.resent;
}

namespace {

struct WeightedBit {
  Bit bit;
  double w;
};

// Measurement branches for a prepared qubit: one deterministic outcome in
// the matching basis, two half-weight outcomes in the conjugate basis.
std::array<WeightedBit, 2> measure_branches(Basis qubit_basis, Bit qubit_bit,
                                            Basis meas_basis, int& count) {
  if (qubit_basis == meas_basis) {
    count = 1;
    return {{{qubit_bit, 1.0}, {0, 0.0}}};
  }
  count = 2;
  return {{{0, 0.5}, {1, 0.5}}};
}

std::array<WeightedBit, 2> flip_branches(Bit bit, double d, int& count) {
  if (d <= 0.0) {
    count = 1;
    return {{{bit, 1.0}, {0, 0.0}}};
  }
  if (d >= 1.0) {
    count = 1;
    return {{{static_cast<Bit>(bit ^ 1u), 1.0}, {0, 0.0}}};
  }
  count = 2;
  return {{{bit, 1.0 - d}, {static_cast<Bit>(bit ^ 1u), d}}};
}

constexpr std::array<Basis, 2> kBases = {Basis::X, Basis::Y};

}  // namespace

StatisticsReport exact_statistics(const AttackPolicy& policy, double d1, double d2) {
  if (d1 < 0.0 || d1 > 1.0 || d2 < 0.0 || d2 > 1.0)
    throw std::domain_error("exact_statistics: channel QBER must be in [0, 1]");
  policy.validate();

  double p_sift = 0.0;
  double p_bob_err = 0.0;
  double p_trent_err = 0.0;
  double p_twbr = 0.0;
  double p_info = 0.0;

  // The pipeline order mirrors the session engine exactly: Eve intercepts at
  // the leg entry, intrinsic noise flips just before the receiving node.
  // Loss and detector draws never depend on basis or bit values, so they
  // drop out of every conditional statistic and are not enumerated.
  for (Basis alice_basis : kBases) {
    for (Bit alice_bit : {Bit{0}, Bit{1}}) {
      const double w_alice = 0.25;

      // Leg 1 entry: Eve or pass-through.
      const int n_eve1 = policy.channel1 ? 2 : 1;
      for (int e1 = 0; e1 < n_eve1; ++e1) {
        const Basis eve1_basis = kBases[static_cast<std::size_t>(e1)];
        double w_e1 = policy.channel1 ? 0.5 : 1.0;

        int n_e1_out = 1;
        std::array<WeightedBit, 2> e1_out = {{{alice_bit, 1.0}, {0, 0.0}}};
        Basis leg1_qubit_basis = alice_basis;
        if (policy.channel1)
          e1_out = measure_branches(alice_basis, alice_bit, eve1_basis, n_e1_out);

        for (int i1 = 0; i1 < n_e1_out; ++i1) {
          const double w_after_e1 = w_alice * w_e1 * e1_out[static_cast<std::size_t>(i1)].w;
          if (w_after_e1 == 0.0) continue;
          const Bit leg1_bit = e1_out[static_cast<std::size_t>(i1)].bit;
          if (policy.channel1) leg1_qubit_basis = eve1_basis;

          int n_f1 = 0;
          const auto f1 = flip_branches(leg1_bit, d1, n_f1);
          for (int k1 = 0; k1 < n_f1; ++k1) {
            const double w_at_trent = w_after_e1 * f1[static_cast<std::size_t>(k1)].w;
            if (w_at_trent == 0.0) continue;
            const Bit bit_at_trent = f1[static_cast<std::size_t>(k1)].bit;

            for (Basis trent_basis : kBases) {
              const double w_tb = 0.5;
              int n_t = 0;
              const auto t_out =
                  measure_branches(leg1_qubit_basis, bit_at_trent, trent_basis, n_t);
              for (int it = 0; it < n_t; ++it) {
                const double w_trent =
                    w_at_trent * w_tb * t_out[static_cast<std::size_t>(it)].w;
                if (w_trent == 0.0) continue;
                const Bit trent_bit = t_out[static_cast<std::size_t>(it)].bit;

                // Leg 2 entry: Trent re-prepares in his measurement basis.
                const int n_eve2 =
                    !policy.channel2
                        ? 1
                        : (policy.basis_rule == BasisRule::ReuseChannel1Basis ? 1 : 2);
                for (int e2 = 0; e2 < n_eve2; ++e2) {
                  Basis eve2_basis = kBases[static_cast<std::size_t>(e2)];
                  double w_e2 = 1.0;
                  if (policy.channel2) {
                    if (policy.basis_rule == BasisRule::ReuseChannel1Basis)
                      eve2_basis = eve1_basis;
                    else
                      w_e2 = 0.5;
                  }

                  int n_e2_out = 1;
                  std::array<WeightedBit, 2> e2_out = {{{trent_bit, 1.0}, {0, 0.0}}};
                  Basis leg2_qubit_basis = trent_basis;
                  if (policy.channel2) {
                    e2_out = measure_branches(trent_basis, trent_bit, eve2_basis, n_e2_out);
                    leg2_qubit_basis = eve2_basis;
                  }

                  for (int i2 = 0; i2 < n_e2_out; ++i2) {
                    const double w_after_e2 =
                        w_trent * w_e2 * e2_out[static_cast<std::size_t>(i2)].w;
                    if (w_after_e2 == 0.0) continue;
                    const Bit leg2_bit = e2_out[static_cast<std::size_t>(i2)].bit;

                    int n_f2 = 0;
                    const auto f2 = flip_branches(leg2_bit, d2, n_f2);
                    for (int k2 = 0; k2 < n_f2; ++k2) {
                      const double w_at_bob =
                          w_after_e2 * f2[static_cast<std::size_t>(k2)].w;
                      if (w_at_bob == 0.0) continue;
                      const Bit bit_at_bob = f2[static_cast<std::size_t>(k2)].bit;

                      for (Basis bob_basis : kBases) {
                        if (bob_basis != alice_basis || trent_basis != alice_basis)
                          continue;  // conditioning on the sift event
                        const double w_bb = 0.5;
                        int n_b = 0;
                        const auto b_out = measure_branches(leg2_qubit_basis, bit_at_bob,
                                                            bob_basis, n_b);
                        for (int ib = 0; ib < n_b; ++ib) {
                          const double w =
                              w_at_bob * w_bb * b_out[static_cast<std::size_t>(ib)].w;
                          if (w == 0.0) continue;
                          const Bit bob_bit = b_out[static_cast<std::size_t>(ib)].bit;

                          p_sift += w;
                          if (bob_bit != alice_bit) p_bob_err += w;
                          if (trent_bit != alice_bit) p_trent_err += w;
                          if (trent_bit != alice_bit && bob_bit == alice_bit) p_twbr += w;
                          if (policy.channel1 && eve1_basis == alice_basis) p_info += w;
                        }
                      }
                    }
                  }
                }
              }
            }
          }
        }
      }
    }
  }

  StatisticsReport report;
  report.bob_qber = p_bob_err / p_sift;
  report.trent_qber = p_trent_err / p_sift;
  report.trent_wrong_bob_right = p_twbr / p_sift;
  report.eve_information = p_info / p_sift;
  return report;
}

}  // namespace qrelay
