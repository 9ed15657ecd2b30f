#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "maser/types.hpp"

namespace maser {

struct AtomState {
  Complex c_g{1.0, 0.0};
  Complex c_e{0.0, 0.0};
};

struct CouplingSpec {
  double phi = 0.0;  // integrated coupling, dimensionless
  double nu = 1.0;   // atom rate
  double tau = 0.0;  // interaction time
};

struct NoiseSpec {
  double kappa = 0.0;
  double n_th = 0.0;
};

struct KrausSet {
  std::vector<Operator> ops;
  std::vector<std::string> labels;
};

// Populations of the six atom levels |0>,..,|4>,|aux>.
struct ThermalAtomSpec {
  double p0 = 0, p1 = 0, p2 = 0, p3 = 0, p4 = 0, pa = 0;
  // Boltzmann weights exp(-E_j/kT) over the six level energies.
  static ThermalAtomSpec boltzmann(const double (&energy)[6], double kT);
};

struct MixedAtomSpec {
  double p_a = 1, p_b = 0, p_0 = 0, p_2 = 0, p_4 = 0, p_aux = 0;
  AtomState atom;  // defines |psi_a> = c_g|1> + c_e|3>, |psi_b> orthogonal
};

// Two-photon pair {M_g, M_e}: M_g = c_g cos(phi sqrt(a+2 a2))
// - i c_e a+2 sin(phi sqrt(a2 a+2))/sqrt(a2 a+2), M_e analogous.
// The top two Fock levels are treated as an exact reflecting wall so the
// truncated set stays complete to machine precision.
KrausSet kraus_two_photon(const AtomState& atom, double phi, int dim);

// M~_g = M_g - c_g I, M~_e = M_e + c_e I (dark on the stationary pair).
KrausSet shifted_kraus(const KrausSet& kraus, const AtomState& atom);

// rho -> sum_j M_j rho M_j†, column-stacked.
Superoperator discrete_map(const KrausSet& kraus);

// L0 = nu (M0 - I).
Superoperator generator_L0(const KrausSet& kraus, double nu);
Superoperator generator_from_map(const Superoperator& map, double nu);

// -i[H, rho] + sum_k rate_k D[L_k] rho.
Superoperator lindblad_generator(
    const Operator& h, const std::vector<std::pair<double, Operator>>& jumps);

// kappa(n_th+1) D[a] + kappa n_th D[a†].
Superoperator loss_dissipator(double kappa, double n_th, int dim);

// Eight operators: sqrt(p_l) {M_g, M_e} for the atom states a/b plus the
// Stark phase unitaries exp(i phi2 n), exp(-i (phi2+phi3)(n+1)),
// exp(i phi3 (n+1)), identity, weighted by their populations.
KrausSet kraus_mixed_atom(const MixedAtomSpec& spec, double phi, double phi2,
                          double phi3, int dim);

// Eight operators for the level-diagonal atom: sqrt(p1) {M_gg, M_eg},
// sqrt(p3) {M_ge, M_ee} and the four phase unitaries.
KrausSet kraus_thermal_atom(const ThermalAtomSpec& spec, double phi,
                            double phi2, double phi3, int dim);

// -i[g* a2 + g a+2, .] + kappa_2ph D[a2], with g = nu c_g* c_e phi and
// kappa_2ph = nu |c_g|^2 phi^2. Warns (stderr) when |phi| n_max is not small.
Superoperator weak_coupling_generator(const AtomState& atom, double phi,
                                      double nu, int dim);

// Mixed-atom extension: two-photon drive weighted by (p_a - p_b),
// two-photon loss/gain, photon-number rotation and number dephasing, all
// derived from the same Kraus conventions as kraus_mixed_atom.
Superoperator weak_coupling_generator_mixed(const MixedAtomSpec& spec,
                                            double phi, double phi2,
                                            double phi3, double nu, int dim);

struct BeamScheme {
  enum Kind { GaussQuadrature, MonteCarlo } kind = GaussQuadrature;
  int order = 21;         // quadrature order
  int samples = 100;      // Monte Carlo trajectory count
  std::uint64_t seed = 0;
};

// Average of the two-photon map over a Gaussian coupling distribution
// truncated to phi > 0.
Superoperator beam_averaged_map(const AtomState& atom, double phi_mean,
                                double phi_sigma, double nu, int dim,
                                const BeamScheme& scheme = {});

struct DecayModifiedMap {
  AtomState effective_atom;
  double rate_factor = 1.0;  // multiplies nu
  Superoperator map;
};

// Atom decay to uncoupled levels at rates gamma1 (level 1) and gamma3
// (level 3), with preparation flight time t_prep before the cavity:
// damped no-decay kernels plus the integrated single-decay-event term.
DecayModifiedMap decay_modified_map(const AtomState& atom, double lambda,
                                    double tau, double gamma1, double gamma3,
                                    double t_prep, int dim);

std::string to_json(const KrausSet& kraus);
std::string superop_to_json(const Superoperator& op);

}  // namespace maser
