#pragma once

#include <utility>
#include <vector>

#include <maser/steady.hpp>
#include <maser/types.hpp>

namespace maser {

struct MetrologyReport {
  double mean_n = 0.0;
  double var_n = 0.0;
  double qfi = 0.0;
  double enhancement = 0.0;  // NaN when mean_n = 0 (masked downstream)
  double purity = 0.0;
};

// Quantum Fisher information for phase encoding by the photon number,
// rho_phi = e^{-i phi n} rho e^{i phi n}, via the eigendecomposition formula.
// Denominators p_j + p_j' < 1e-12 are skipped.
double qfi(const DensityMatrix& rho);

// Pure-state shortcut 4 Var(n).
double qfi_pure(const Ket& psi);

// Enhancement over the coherent-state benchmark 4<n>.
double enhancement(double qfi_value, double mean_n);

MetrologyReport metrology_report(const DensityMatrix& rho);

// QFI of p|P+><P+| + (1-p)|P-><P-| + c|P+><P-| + c*|P-><P+| using the parity
// selection rule <P+|n|P-> = 0. Requires |c|^2 <= p(1-p).
double qfi_dfs(double p, Complex c, const StationaryPair& pair);

// Independent fidelity-based oracle: 8(1 - F(rho, rho_dphi))/dphi^2 with one
// Richardson step over dphi and dphi/2.
double qfi_fd_oracle(const DensityMatrix& rho, double dphi = 1e-4);

struct ModeReport {
  double weight = 0.0;
  double mean_n = 0.0;
  double qfi = 0.0;
};

struct MultimodalReport {
  std::vector<ModeReport> modes;
  double cross_term = 0.0;  // 4 sum_{k<k'} p_k p_k' (mean_k - mean_k')^2
  double total = 0.0;
};

// Decomposes a pure state over disjoint photon-number ranges (inclusive
// bounds), e.g. the segments between soft walls. The per-mode QFIs plus the
// cross term reassemble qfi_pure exactly.
MultimodalReport qfi_multimodal_decomposition(
    const Ket& psi, const std::vector<std::pair<int, int>>& partition);

}  // namespace maser
