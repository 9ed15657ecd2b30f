#pragma once

#include <array>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include <maser/channels.hpp>
#include <maser/evolve.hpp>
#include <maser/steady.hpp>
#include <maser/types.hpp>
#include <maser/walls.hpp>

namespace maser {

// Effective generator on the decoherence-free subspace, written in the basis
// (|P+><P+|, |P-><P-|, |P+><P-|, |P-><P+|) where P± are the even/odd pure
// stationary states. Populations and coherences never mix (weak parity
// symmetry), so the matrix is block diagonal 2+2. Metadata fields not
// meaningful for a given generator are left zero.
struct DfsGenerator {
  Eigen::Matrix4cd matrix = Eigen::Matrix4cd::Zero();
  double n_plus = 0.0;
  double n_minus = 0.0;
  Complex eta{0.0, 0.0};
  double Omega = 0.0;
  double gamma_deph = 0.0;
  double X_plus = 0.0;
  double X_minus = 0.0;
};

struct MetaSteadyState {
  double p_plus = 0.0;
  DensityMatrix assembled;
};

struct DfsClassification {
  std::array<Complex, 4> eigenvalues{};  // descending real part
  bool classical_flag = false;
  Ket psi1, psi2;  // (|P+> ± |P->)/sqrt(2)
  double gamma_loss = 0.0;
  Operator jump;
};

// Atom decay rates: gamma_jk is |k> -> |j| with E_j < E_k; gamma_k_unc is the
// rate from |k> to levels not coupled to the cavity. Gamma_1/Gamma_3 are the
// total rates out of the superposition levels.
struct DecayRates {
  double gamma_01 = 0.0;
  double gamma_03 = 0.0;
  double gamma_13 = 0.0;
  double gamma_23 = 0.0;
  double gamma_1_unc = 0.0;
  double gamma_3_unc = 0.0;
  double Gamma1() const { return gamma_01 + gamma_1_unc; }
  double Gamma3() const { return gamma_03 + gamma_13 + gamma_23 + gamma_3_unc; }
};

struct DecayBounds {
  double gamma_deph_bound = 0.0;
  double omega_bound = 0.0;
  double nu_reduced = 0.0;
};

// A metastable state living between hard walls. `lower`/`upper` are the wall
// positions bounding its support (-1 when the segment starts at the vacuum
// end or is unbounded above within the truncation).
struct LadderState {
  DensityMatrix rho;
  int parity = 1;  // +1 even, -1 odd
  long lower = -1;
  long upper = -1;
};

struct LadderNoise {
  double kappa = 0.0;
  double nu = 0.0;
  std::vector<Operator> phase_ops;  // parity-swapping corrections M_0, M_2, M_4
  double Gamma1_tau = 0.0;          // Gamma_1 * tau
  double Gamma3_tau = 0.0;          // Gamma_3 * tau
  double gamma13_tau = 0.0;         // gamma_13 * tau
  double beam_variance = 0.0;       // variance of the integrated coupling
};

// Classical rate matrix over the between-wall states: rates(j, i) is the
// transition rate from state i to state j, columns sum to zero. labels[i] is
// (k, parity) with k the rank of the state within its parity sector.
struct LadderRates {
  Eigen::MatrixXd rates;
  std::vector<std::pair<int, int>> labels;
  bool detailed_balance = false;
  Eigen::VectorXd stationary;
};

// Single-photon loss acting on the DFS: population exchange at kappa<n>± and
// coherence decay at kappa(<n>+ + <n>-)/2 with cross-coupling eta_loss.
DfsGenerator eff_loss_generator(const StationaryPair& pair,
                                const ConservedCoherence& coherence,
                                double kappa);

// Corrections beyond the far-detuned limit: population exchange at nu<X>±
// with X = M_0^dag M_0 + M_2^dag M_2 + M_4^dag M_4, coherence rotation Omega
// obtained from the conserved-coherence functional applied to the channel
// difference. `higher` must carry labels {M_0..M_4, M_a}.
DfsGenerator eff_correction_generator(const StationaryPair& pair,
                                      const ConservedCoherence& coherence,
                                      const KrausSet& higher, double nu);

// Closed-form second-order expression for <psi|X|psi>; cross-check only, the
// direct Kraus evaluation above is the contract.
double x_expectation_closed_form(const ModelParams& params,
                                 const AtomState& atom, const Ket& psi);

// (Omega, gamma_deph) of the dephasing generator induced by a perturbed
// discrete map: -i Omega - gamma_deph = nu Tr[L_{+-} dM(|P+><P-|)].
std::pair<double, double> eff_dephasing_rate(const Superoperator& perturbed_map,
                                             const Superoperator& base_map,
                                             const StationaryPair& pair,
                                             const ConservedCoherence& coherence,
                                             double nu);

// Dephasing-rate bound for a nonmonochromatic beam with the given variance of
// the integrated coupling (the matching frequency is exactly zero).
double beam_dephasing_bound(const StationaryPair& pair, double variance,
                            double nu);

DecayBounds decay_bounds(const AtomState& atom, const DecayRates& rates,
                         double T_prep, double tau, double nu);

// Eigenvalues of the 4x4 generator, the classicality flag (|eta| ~ 1 and
// metastable gap ratio <= 0.1), the classical metastable states, the
// coherence decay rate, and the effective jump operator between them.
DfsClassification dfs_eigen_and_classical(const DfsGenerator& gen,
                                          const StationaryPair& pair);

MetaSteadyState combined_steady(const StationaryPair& pair, double n_plus,
                                double n_minus, double X_plus, double X_minus,
                                double kappa, double nu);

// Rate matrix of the metastable ladder between hard walls: parity-swapping
// transitions from loss/corrections plus same-parity transitions from atom
// decay and beam spread. With |c_e| = 1 every transition must increase the
// photon number (no trapping); violation raises NumericalError.
LadderRates hardwall_ladder(const AtomState& atom, double phi,
                            const WallSequence& walls, const LadderNoise& noise,
                            const std::vector<LadderState>& states);

}  // namespace maser
