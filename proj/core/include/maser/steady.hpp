#pragma once

#include <variant>
#include <vector>

#include "maser/channels.hpp"
#include "maser/types.hpp"
#include "maser/walls.hpp"

namespace maser {

struct StationaryPair {
  Ket psi_plus;   // even support
  Ket psi_minus;  // odd support
  AtomState atom;
  double phi = 0.0;
  int support_bound_plus = 0;   // first even hard wall or n_max-ish bound
  int support_bound_minus = 1;  // first odd hard wall or n_max-ish bound
  // A branch is exact when its chain ends at a cos = -1 wall or its tail
  // mass at the truncation edge is below 1e-8. A wall in one sector often
  // leaves the other sector without a pure state at desk-scale truncation;
  // that branch is still returned (normalized chain) but flagged here.
  bool plus_stationary = true;
  bool minus_stationary = true;
};

struct BoundaryEigenvalues {
  Complex alpha;  // M_g eigenvalue
  Complex beta;   // M_e eigenvalue
};

struct ConservedCoherence {
  Operator L_pm;  // left conserved quantity paired with |Psi+><Psi-|
};

// Pure stationary pair from the coefficient recurrence
// c_{n+2} = -i (c_e/c_g) sin_n(phi)/(1 - cos_n(phi)) c_n per parity,
// truncated at the first matching-parity hard wall with cos = -1, or at
// dim with a tail-mass check. Throws TruncationError only when neither
// parity admits a pure state (growing tails, cos = +1 blocking walls).
StationaryPair pure_stationary(const AtomState& atom, double phi, int dim);

// Asserts M_g|Psi±> = alpha|Psi±>, M_e|Psi±> = beta|Psi±> within tol for
// the branches flagged stationary.
BoundaryEigenvalues verify_eigenstate(const StationaryPair& pair,
                                      const KrausSet& kraus,
                                      double tol = 1e-8);

// Left kernel element of L0 in the odd-row/even-column coherence sector,
// normalized so Tr(L_pm |Psi+><Psi-|) = 1.
ConservedCoherence conserved_coherence(const Superoperator& L0,
                                       const StationaryPair& pair);

// Projection onto the stationary DFS:
// Tr(1_+ rho)|Psi+><Psi+| + Tr(1_- rho)|Psi-><Psi-| +
// Tr(L_pm rho)|Psi+><Psi-| + h.c.-paired term.
DensityMatrix dfs_project(const DensityMatrix& rho,
                          const StationaryPair& pair,
                          const ConservedCoherence& coherence);

struct TrappingState {
  int m = 0;
  int cos_sign = 1;
};

// Fock trapping states |m> at the hard walls of the given coupling
// (the |c_e| = 1 channel leaves them invariant).
std::vector<TrappingState> trapping_state(double phi, int dim);

// Coherence |m><m'| between two trapping states is stationary iff the
// wall cosine signs match.
bool trapping_coherence_stationary(const TrappingState& a,
                                   const TrappingState& b);

// Stationary state supported strictly between two consecutive
// same-parity hard walls: pure (recurrence) when the boundary cosines
// are opposite, mixed (restricted-generator kernel) otherwise.
std::variant<Ket, DensityMatrix> between_walls_stationary(
    const AtomState& atom, double phi, const HardWall& lower,
    const HardWall& upper, int dim);

// Diagonal steady state of the level-diagonal atom dynamics:
// h_{n+2}/h_n = p3/p1 on each parity sector, mixed with weight p on even.
DensityMatrix thermal_steady(const ThermalAtomSpec& spec, double p, int dim);

}  // namespace maser
