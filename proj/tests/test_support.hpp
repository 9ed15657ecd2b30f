#pragma once

#include <random>

#include <maser/fock.hpp>
#include <maser/linalg.hpp>
#include <maser/types.hpp>

namespace maser::test {

inline Ket random_ket(int dim, std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  Ket psi(dim);
  for (int i = 0; i < dim; ++i) psi(i) = Complex(gauss(rng), gauss(rng));
  psi.normalize();
  return psi;
}

inline DensityMatrix random_density(int dim, std::mt19937_64& rng,
                                    int rank = 0) {
  if (rank <= 0) rank = dim;
  std::uniform_real_distribution<double> unif(0.1, 1.0);
  DensityMatrix rho = DensityMatrix::Zero(dim, dim);
  for (int r = 0; r < rank; ++r) {
    Ket psi = random_ket(dim, rng);
    rho += unif(rng) * psi * psi.adjoint();
  }
  rho /= rho.trace().real();
  return rho;
}

inline DensityMatrix apply_map(const Superoperator& map,
                               const DensityMatrix& rho) {
  return unvec(Ket(map * vec(rho)), rho.rows());
}

inline double superop_distance(const Superoperator& a, const Superoperator& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace maser::test
