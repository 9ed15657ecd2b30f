#pragma once

#include <string>
#include <utility>
#include <vector>

#include <maser/channels.hpp>
#include <maser/types.hpp>

namespace maser {

// One logged sample of a trajectory. `time` holds the atom count k for
// discrete runs and the physical time t for continuous ones.
struct TrajectoryPoint {
  double time = 0.0;
  DensityMatrix state;
};

struct SpectrumMode {
  Complex eigenvalue;
  Operator right;  // unvectorized right eigenmode, Frobenius-normalized
};

// Eigenvalues sorted by descending real part. gap_ratios[i] compares mode i
// against mode i+1; metastable[i] is set when that ratio drops below 0.1,
// marking a timescale separation after mode i.
struct SpectrumReport {
  std::vector<SpectrumMode> modes;
  std::vector<double> gap_ratios;
  std::vector<bool> metastable;
};

// Couplings and detunings of the (5+1)-level cascade: levels |0..4> chained
// by g_1..g_4, auxiliary |a> coupled to |3> by G. Detuning Delta_j belongs to
// the j-th step of the ladder, delta to the auxiliary level.
struct ModelParams {
  Complex g1{0.0, 0.0};
  Complex g2{0.0, 0.0};
  Complex g3{0.0, 0.0};
  Complex g4{0.0, 0.0};
  Complex G{0.0, 0.0};
  double Delta1 = 0.0;
  double Delta2 = 0.0;
  double Delta3 = 0.0;
  double Delta4 = 0.0;
  double delta = 0.0;
  double tau = 0.0;
};

// Applies `map` to rho0 `steps` times, logging every `stride` applications
// (the initial and final states are always included). Logged states are
// re-Hermitized and trace-renormalized to guard against float drift.
std::vector<TrajectoryPoint> evolve_discrete(const Superoperator& map,
                                             const DensityMatrix& rho0,
                                             long steps, long stride = 1);

// Propagates d rho/dt = gen(rho) to each time in `times` (ascending, >= 0).
// Small generators use a dense spectral propagator cross-checked against the
// Pade exponential; large ones fall back to Krylov stepping.
std::vector<TrajectoryPoint> evolve_continuous(const Superoperator& gen,
                                               const DensityMatrix& rho0,
                                               const std::vector<double>& times);

// Full eigendecomposition of the generator; returns the `count` slowest
// modes (count <= 0 means all).
SpectrumReport spectrum(const Superoperator& gen, int count = 0);

// Exact single-atom channel of the (5+1) model: the conserved excitation
// number splits the Hamiltonian into blocks of dimension <= 6 which are
// exponentiated exactly; Kraus operators are indexed by the outgoing atom
// level, labels {M_0..M_4, M_a}. Atom enters as c_g|1> + c_e|3>.
KrausSet full_model_map(const ModelParams& params, const AtomState& atom,
                        int dim);

std::vector<std::pair<double, double>> fidelity_trace(
    const std::vector<TrajectoryPoint>& traj, const DensityMatrix& target);

// Maximal windows of the (t, F) trace where |dF/dlog10 t| stays below
// `slope_threshold` for at least `min_decades` decades. Points at t <= 0 are
// ignored. Returns (t_begin, t_end) pairs.
std::vector<std::pair<double, double>> find_plateaus(
    const std::vector<std::pair<double, double>>& trace,
    double slope_threshold = 0.01, double min_decades = 1.0);

// Columns: time_label, trace, purity, mean_n, parity, fidelity. `preamble`
// is written verbatim ahead of the column header (comment lines).
void write_trajectory_csv(const std::vector<TrajectoryPoint>& traj,
                          const DensityMatrix& target, const std::string& path,
                          const std::string& time_label = "t",
                          const std::string& preamble = "");

}  // namespace maser
