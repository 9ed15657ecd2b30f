#pragma once

#include <functional>

#include "maser/types.hpp"

namespace maser {

// Kronecker product A ⊗ B.
Operator kron(const Operator& a, const Operator& b);

// Column stacking: vec(|i⟩⟨j|) = |i⟩ ⊗ e_j with column-major layout,
// so vec(AXB) = (Bᵀ ⊗ A) vec(X).
Ket vec(const Operator& x);
Operator unvec(const Ket& v, Eigen::Index rows);

// Superoperator for ρ ↦ AρB.
Superoperator sandwich(const Operator& a, const Operator& b);

// Superoperator for ρ ↦ LρL† − ½{L†L, ρ}.
Superoperator dissipator(const Operator& l);

// Superoperator for ρ ↦ −i[H, ρ].
Superoperator commutator_superop(const Operator& h);

// Matrix exponential, Pade-13 with scaling and squaring.
Operator expm(const Operator& a);

// exp(A)·v via Arnoldi projection (subspace dimension m) with adaptive
// substepping until the local error estimate is below tol.
Ket expm_multiply(const Superoperator& a, const Ket& v, double t,
                  int krylov_dim = 30, double tol = 1e-9);

// Adaptive Simpson quadrature of a matrix-valued integrand on [a, b],
// refining until the Richardson error estimate is below tol (entrywise
// max norm). Throws ConvergenceError past max_depth.
Operator integrate_matrix(const std::function<Operator(double)>& f, double a,
                          double b, double tol = 1e-10, int max_depth = 40);

// Eigen-decomposition of a Hermitian matrix with eigenvalues clipped to
// zero when within clip of the negative axis; throws NumericalError if
// an eigenvalue is more negative than -clip_fail.
struct HermEigen {
  Eigen::VectorXd values;
  Operator vectors;
};
HermEigen herm_eigen(const Operator& a, double clip = 1e-12,
                     double clip_fail = 1e-8);

// Principal square root of a positive semidefinite Hermitian matrix.
Operator herm_sqrt(const Operator& a);

// Trace distance ½‖ρ − σ‖₁.
double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma);

}  // namespace maser
