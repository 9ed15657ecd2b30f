#pragma once

#include <iosfwd>
#include <string>

#include "maser/types.hpp"

namespace maser {

// Ladder and related operators on the truncated space |0..dim-1>.
Operator annihilation_op(int dim);
Operator creation_op(int dim);
Operator number_op(int dim);
Operator parity_op(int dim);
Operator identity_op(int dim);

// Mass of the coherent state |alpha> beyond the truncation, computed
// from the Poisson tail.
double coherent_tail_mass(int dim, Complex alpha);

// exp(alpha a† - alpha* a). Throws TruncationError when
// coherent_tail_mass(dim, alpha) >= 1e-8.
Operator displacement_op(int dim, Complex alpha);

Ket fock_state(int dim, int n);
Ket coherent_state(int dim, Complex alpha);

// (|alpha> + parity|-alpha>)/sqrt(2 + 2 parity e^{-2|alpha|^2}),
// parity = +1 or -1. Throws DegenerateError for the odd cat at alpha=0.
Ket cat_state(int dim, Complex alpha, int parity);

DensityMatrix projector(const Ket& psi);

double expval(const DensityMatrix& rho, const Operator& op);
double photon_mean(const DensityMatrix& rho);
double photon_variance(const DensityMatrix& rho);
double purity(const DensityMatrix& rho);

// Uhlmann fidelity Tr sqrt(sqrt(rho) sigma sqrt(rho)).
double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma);

struct WignerGrid {
  double re_min = -4.0;
  double re_max = 4.0;
  double im_min = -4.0;
  double im_max = 4.0;
  int resolution = 161;
  Eigen::MatrixXd values;  // values(i, j) = W(re_i + i im_j)
};

// W(alpha) = (2/pi) Tr[rho D(2 alpha) P], evaluated with exact
// infinite-space displacement matrix elements on rho's support.
WignerGrid wigner(const DensityMatrix& rho, const WignerGrid& spec = {});

// Riemann-sum normalization of the grid (should be ~1 for resolved states).
double wigner_norm(const WignerGrid& grid);

void write_csv(const WignerGrid& grid, std::ostream& os);
std::string to_json(const WignerGrid& grid);

}  // namespace maser
