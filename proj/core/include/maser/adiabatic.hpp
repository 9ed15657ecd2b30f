#pragma once

#include "maser/channels.hpp"
#include "maser/evolve.hpp"
#include "maser/types.hpp"

namespace maser {

// Coefficients of the block Hamiltonian
//   [[A a†a + B, conj(C) a†²], [C a², D a†a + E]]
// on the (ground, excited) two-level basis tensored with Fock space.
struct GeneralTwoPhotonParams {
  double A = 0.0;
  double B = 0.0;
  Complex C{0.0, 0.0};
  double D = 0.0;
  double E = 0.0;
  double tau = 0.0;
};

// Second-order effective Hamiltonian of the cascade: per-level Stark terms
// (constant plus photon-number slope) and the two-photon coupling.
struct EffectiveHamiltonian {
  double stark_g_const = 0.0;  // sigma_11 constant
  double stark_g_slope = 0.0;  // sigma_11 a†a
  double stark_e_const = 0.0;  // sigma_33 constant
  double stark_e_slope = 0.0;  // sigma_33 a†a
  Complex coupling{0.0, 0.0};  // a² sigma_31 (h.c. implied)
  double max_ratio = 0.0;      // largest |g/Delta| over the eliminated levels
  bool far_detuned = true;     // max_ratio <= 0.3

  GeneralTwoPhotonParams as_general(double tau) const;
  // 2*dim Hermitian block matrix, ground block first.
  Operator matrix(int dim) const;
};

EffectiveHamiltonian adiabatic_heff(const ModelParams& params);

// Signed relative residuals of the three Stark-cancellation conditions,
// each measured against its right-hand side. pass = all |r| < 1e-10.
struct StarkResiduals {
  double a = 0.0;
  double b = 0.0;
  double c = 0.0;
  bool pass = false;
};
StarkResiduals stark_check(const ModelParams& params);

enum class TwoPhotonCase { DephasingOnly, CaseA, CaseB, NoPureState };

struct TwoPhotonClass {
  TwoPhotonCase kind = TwoPhotonCase::NoPureState;
  // CaseB only: c_{n+2}/c_n = (c_e/c_g) * factor * sqrt((n+1)/(n+2)).
  Complex recurrence_factor{0.0, 0.0};
};

TwoPhotonClass general_twophoton_classify(const GeneralTwoPhotonParams& p);

// Normalized even-parity state built from the CaseB recurrence.
// Throws DegenerateError unless the classification is CaseB with a
// normalizable tail (|c_e/c_g| |factor| < 1).
Ket caseb_stationary(const TwoPhotonClass& cls, const AtomState& atom, int dim);

enum class KrausOrder { ExactBlock, Series2 };

// Series expansion internals, exposed for tests. S1/S2 act on the full
// six-level-by-Fock space and are asserted anti-Hermitian. delta_heff is
// the time-averaged fourth-order diagonal correction on the two-level
// block; it is nonzero only for uniform couplings with G²/δ = −2g²/Δ.
struct AdiabaticExpansion {
  Operator S1;
  Operator S2;
  Operator delta_heff;
  bool uniform = false;
};
AdiabaticExpansion adiabatic_expansion(const ModelParams& params, int dim);

// Single-atom Kraus set beyond the two-photon limit, labels {M_0..M_4, M_a}.
// ExactBlock diagonalizes the conserved-excitation blocks and is the
// normative channel; Series2 assembles the explicit first/second-order
// expressions and exists to validate them against ExactBlock.
KrausSet higher_order_kraus(const ModelParams& params, const AtomState& atom,
                            int dim, KrausOrder order);

}  // namespace maser
