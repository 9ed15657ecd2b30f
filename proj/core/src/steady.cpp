#include "maser/steady.hpp"

#include <Eigen/SVD>
#include <cmath>
#include <sstream>

#include "maser/errors.hpp"
#include "maser/fock.hpp"
#include "maser/linalg.hpp"

namespace maser {

namespace {

constexpr double kWallTol = 1e-9;

struct ChainResult {
  int bound = 0;
  bool stationary = true;
};

// Recurrence walk on one parity chain. `bound` is the last populated
// index; `stationary` is false when the chain meets a cos = +1 wall or
// reaches the truncation edge with tail mass above 1e-8.
ChainResult recurrence_chain(const AtomState& atom, double phi, int start,
                             int dim, Ket& psi) {
  const Complex ratio = atom.c_e / atom.c_g;
  psi = Ket::Zero(dim);
  psi[start] = 1.0;
  int n = start;
  while (true) {
    if (n + 2 >= dim) {
      // no wall inside the truncation: accept only a decaying tail
      const double total = psi.squaredNorm();
      double tail = std::norm(psi[n]);
      if (n - 2 >= 0) tail += std::norm(psi[n - 2]);
      return {n, tail / total <= 1e-8};
    }
    const double s = sin_n(n, phi);
    const double c = cos_n(n, phi);
    if (std::abs(s) < kWallTol) {
      // cos = -1 terminates the chain exactly; cos = +1 blocks it without
      // closing the eigenvalue equations (even K walls).
      return {n, c < 0.0};
    }
    if (std::abs(1.0 - c) < 1e-13)
      throw DegenerateError(
          "pure_stationary: degenerate recurrence denominator "
          "|1 - cos_n| < 1e-13 away from a hard wall");
    psi[n + 2] = -I * ratio * (s / (1.0 - c)) * psi[n];
    n += 2;
    if (std::abs(psi[n]) > 1e100) psi /= std::abs(psi[n]);
  }
}

void normalize_phase(Ket& psi) {
  psi.normalize();
  for (Eigen::Index i = 0; i < psi.size(); ++i) {
    if (std::abs(psi[i]) > 1e-14) {
      const Complex phase = psi[i] / std::abs(psi[i]);
      psi /= phase;
      if (psi[i].real() < 0.0) psi = -psi;
      return;
    }
  }
}

}  // namespace

StationaryPair pure_stationary(const AtomState& atom, double phi, int dim) {
  if (std::abs(atom.c_g) == 0.0)
    throw DegenerateError(
        "pure_stationary: c_g = 0 has Fock trapping states instead (see "
        "trapping_state)");
  StationaryPair pair;
  pair.atom = atom;
  pair.phi = phi;
  const ChainResult plus = recurrence_chain(atom, phi, 0, dim, pair.psi_plus);
  const ChainResult minus =
      recurrence_chain(atom, phi, 1, dim, pair.psi_minus);
  pair.support_bound_plus = plus.bound;
  pair.support_bound_minus = minus.bound;
  pair.plus_stationary = plus.stationary;
  pair.minus_stationary = minus.stationary;
  if (!plus.stationary && !minus.stationary)
    throw TruncationError(
        "pure_stationary: neither parity admits a pure state below n_max "
        "(growing tails or cos = +1 walls)");
  normalize_phase(pair.psi_plus);
  normalize_phase(pair.psi_minus);
  return pair;
}

BoundaryEigenvalues verify_eigenstate(const StationaryPair& pair,
                                      const KrausSet& kraus, double tol) {
  const Operator& mg = kraus.ops.at(0);
  const Operator& me = kraus.ops.at(1);
  BoundaryEigenvalues out{0.0, 0.0};
  double worst = 0.0;
  std::vector<const Ket*> branches;
  if (pair.plus_stationary) branches.push_back(&pair.psi_plus);
  if (pair.minus_stationary) branches.push_back(&pair.psi_minus);
  for (const Ket* psi : branches) {
    const Ket vg = mg * (*psi);
    const Ket ve = me * (*psi);
    const Complex alpha = psi->dot(vg);
    const Complex beta = psi->dot(ve);
    worst = std::max(worst, (vg - alpha * (*psi)).norm());
    worst = std::max(worst, (ve - beta * (*psi)).norm());
    out = {alpha, beta};
  }
  if (worst > tol)
    throw NotStationaryError("verify_eigenstate: Kraus eigenvalue residual",
                             worst);
  return out;
}

namespace {

// Indices of the vectorized sector {rho_{ij}: i in rows, j in cols}.
std::vector<Eigen::Index> sector_indices(int dim, int row_parity,
                                         int col_parity) {
  std::vector<Eigen::Index> idx;
  for (int j = 0; j < dim; ++j) {
    if (j % 2 != col_parity) continue;
    for (int i = 0; i < dim; ++i) {
      if (i % 2 != row_parity) continue;
      idx.push_back(Eigen::Index(i) + Eigen::Index(j) * dim);
    }
  }
  return idx;
}

Eigen::MatrixXcd submatrix(const Superoperator& a,
                           const std::vector<Eigen::Index>& idx) {
  Eigen::MatrixXcd out(idx.size(), idx.size());
  for (size_t i = 0; i < idx.size(); ++i)
    for (size_t j = 0; j < idx.size(); ++j) out(i, j) = a(idx[i], idx[j]);
  return out;
}

int kernel_dim(const Eigen::MatrixXcd& a, double tol,
               Eigen::VectorXcd* kernel_vec = nullptr) {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(
      a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sv = svd.singularValues();
  const double cutoff = tol * std::max(1.0, sv.size() ? sv[0] : 1.0);
  int count = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv[i] < cutoff) ++count;
  if (kernel_vec && count >= 1)
    *kernel_vec = svd.matrixV().col(sv.size() - 1);
  return count;
}

}  // namespace

ConservedCoherence conserved_coherence(const Superoperator& L0,
                                       const StationaryPair& pair) {
  const int dim = int(pair.psi_plus.size());
  const Superoperator adj = L0.adjoint();
  int total_kernel = 0;
  Eigen::VectorXcd coh_vec;
  for (int rp = 0; rp < 2; ++rp) {
    for (int cp = 0; cp < 2; ++cp) {
      const auto idx = sector_indices(dim, rp, cp);
      const Eigen::MatrixXcd block = submatrix(adj, idx);
      Eigen::VectorXcd vec;
      const int k = kernel_dim(block, 1e-10, &vec);
      total_kernel += k;
      // L_pm† lives in the even-row/odd-column sector
      if (rp == 0 && cp == 1 && k == 1) coh_vec = vec;
    }
  }
  if (total_kernel != 4) {
    std::ostringstream msg;
    msg << "conserved_coherence: kernel dimension " << total_kernel
        << " != 4 (hard walls present; restrict the support first)";
    throw KernelDimensionError(msg.str());
  }
  // embed the sector vector as L_pm† and undo the adjoint
  Operator l_dag = Operator::Zero(dim, dim);
  const auto idx = sector_indices(dim, 0, 1);
  for (size_t i = 0; i < idx.size(); ++i) {
    const Eigen::Index flat = idx[i];
    l_dag(flat % dim, flat / dim) = coh_vec[Eigen::Index(i)];
  }
  Operator l_pm = l_dag.adjoint();
  const Complex norm =
      (l_pm * pair.psi_plus * pair.psi_minus.adjoint()).trace();
  if (std::abs(norm) < 1e-12)
    throw KernelDimensionError(
        "conserved_coherence: kernel element is orthogonal to the DFS "
        "coherence");
  l_pm /= norm;
  return {l_pm};
}

DensityMatrix dfs_project(const DensityMatrix& rho,
                          const StationaryPair& pair,
                          const ConservedCoherence& coherence) {
  const int dim = int(rho.rows());
  Complex even = 0.0, odd = 0.0;
  for (int n = 0; n < dim; ++n)
    ((n % 2 == 0) ? even : odd) += rho(n, n);
  const Complex c_pm = (coherence.L_pm * rho).trace();
  const Complex c_mp = (coherence.L_pm.adjoint() * rho).trace();
  const Ket& p = pair.psi_plus;
  const Ket& m = pair.psi_minus;
  return even * p * p.adjoint() + odd * m * m.adjoint() +
         c_pm * p * m.adjoint() + c_mp * m * p.adjoint();
}

std::vector<TrappingState> trapping_state(double phi, int dim) {
  std::vector<TrappingState> out;
  for (int m = 0; m + 2 <= dim; ++m) {
    if (std::abs(sin_n(m, phi)) < kWallTol)
      out.push_back({m, cos_n(m, phi) > 0.0 ? 1 : -1});
  }
  return out;
}

bool trapping_coherence_stationary(const TrappingState& a,
                                   const TrappingState& b) {
  return a.cos_sign == b.cos_sign;
}

std::variant<Ket, DensityMatrix> between_walls_stationary(
    const AtomState& atom, double phi, const HardWall& lower,
    const HardWall& upper, int dim) {
  if (upper.m <= lower.m || (upper.m - lower.m) % 2 != 0)
    throw DegenerateError(
        "between_walls_stationary: walls must share parity and be ordered");
  const int start = int(lower.m) + 2;
  const int end = int(upper.m);
  if (end >= dim)
    throw TruncationError(
        "between_walls_stationary: upper wall outside truncation");
  if (start == end) {
    Ket psi = fock_state(dim, end);
    return psi;
  }
  if (lower.cos_sign != upper.cos_sign) {
    Ket psi = Ket::Zero(dim);
    psi[start] = 1.0;
    const Complex ratio = atom.c_e / atom.c_g;
    for (int n = start; n + 2 <= end; n += 2) {
      const double s = sin_n(n, phi);
      const double c = cos_n(n, phi);
      if (lower.cos_sign > 0) {
        // standard segment: alpha = +c_g, beta = -c_e
        psi[n + 2] = -I * ratio * (s / (1.0 - c)) * psi[n];
      } else {
        // flipped segment: alpha = -c_g, beta = +c_e
        psi[n + 2] = I * ratio * (s / (1.0 + c)) * psi[n];
      }
      if (std::abs(psi[n + 2]) > 1e100) psi /= std::abs(psi[n + 2]);
    }
    normalize_phase(psi);
    return psi;
  }
  // equal boundary cosines: mixed state from the support-restricted kernel
  const KrausSet kraus = kraus_two_photon(atom, phi, dim);
  const Superoperator gen = generator_L0(kraus, 1.0);
  std::vector<Eigen::Index> idx;
  for (int j = start; j <= end; j += 2)
    for (int i = start; i <= end; i += 2)
      idx.push_back(Eigen::Index(i) + Eigen::Index(j) * dim);
  const Eigen::MatrixXcd block = submatrix(gen, idx);
  Eigen::VectorXcd vec;
  const int k = kernel_dim(block, 1e-10, &vec);
  if (k != 1) {
    std::ostringstream msg;
    msg << "between_walls_stationary: restricted kernel dimension " << k
        << " != 1";
    throw KernelDimensionError(msg.str());
  }
  DensityMatrix rho = DensityMatrix::Zero(dim, dim);
  for (size_t i = 0; i < idx.size(); ++i)
    rho(idx[i] % dim, idx[i] / dim) = vec[Eigen::Index(i)];
  rho = ((rho + rho.adjoint()) / 2.0).eval();
  const double tr = rho.trace().real();
  if (std::abs(tr) < 1e-12)
    throw NumericalError("between_walls_stationary: traceless kernel element");
  rho /= tr;
  return rho;
}

DensityMatrix thermal_steady(const ThermalAtomSpec& spec, double p, int dim) {
  if (spec.p3 >= spec.p1)
    throw DivergenceError(
        "thermal_steady: p3 >= p1 has no normalizable steady state");
  const double r = (spec.p1 > 0.0) ? spec.p3 / spec.p1 : 0.0;
  DensityMatrix rho = DensityMatrix::Zero(dim, dim);
  double even_norm = 0.0, odd_norm = 0.0;
  double h = 1.0;
  for (int n = 0; n < dim; n += 2, h *= r) even_norm += h;
  h = 1.0;
  for (int n = 1; n < dim; n += 2, h *= r) odd_norm += h;
  h = 1.0;
  for (int n = 0; n < dim; n += 2, h *= r) rho(n, n) += p * h / even_norm;
  h = 1.0;
  for (int n = 1; n < dim; n += 2, h *= r)
    rho(n, n) += (1.0 - p) * h / odd_norm;
  return rho;
}

}  // namespace maser
