#include <maser/metrology.hpp>

#include <cmath>
#include <complex>
#include <limits>

#include <Eigen/Dense>

#include <maser/errors.hpp>
#include <maser/fock.hpp>
#include <maser/linalg.hpp>

namespace maser {

double qfi(const DensityMatrix& rho) {
  const int dim = static_cast<int>(rho.rows());
  const HermEigen he = herm_eigen(rho);
  const Operator num = number_op(dim);
  const Operator m = he.vectors.adjoint() * num * he.vectors;
  double total = 0.0;
  for (int j = 0; j < dim; ++j) {
    for (int k = 0; k < dim; ++k) {
      if (j == k) continue;
      const double pj = he.values(j), pk = he.values(k);
      if (pj + pk < 1e-12) continue;
      const double diff = pj - pk;
      total += 2.0 * diff * diff / (pj + pk) * std::norm(m(j, k));
    }
  }
  return total;
}

double qfi_pure(const Ket& psi) {
  double m1 = 0.0, m2 = 0.0;
  for (int n = 0; n < psi.size(); ++n) {
    const double w = std::norm(psi(n));
    m1 += n * w;
    m2 += static_cast<double>(n) * n * w;
  }
  return 4.0 * (m2 - m1 * m1);
}

double enhancement(double qfi_value, double mean_n) {
  if (mean_n == 0.0) throw DegenerateError("enhancement undefined at zero photons");
  return qfi_value / (4.0 * mean_n);
}

MetrologyReport metrology_report(const DensityMatrix& rho) {
  MetrologyReport r;
  r.mean_n = photon_mean(rho);
  r.var_n = photon_variance(rho);
  r.qfi = qfi(rho);
  r.enhancement = r.mean_n > 0.0 ? r.qfi / (4.0 * r.mean_n)
                                 : std::numeric_limits<double>::quiet_NaN();
  r.purity = purity(rho);
  return r;
}

double qfi_dfs(double p, Complex c, const StationaryPair& pair) {
  if (p < -1e-12 || p > 1.0 + 1e-12)
    throw InvalidCoherenceError("population weight outside [0, 1]");
  if (std::norm(c) > p * (1.0 - p) + 1e-12)
    throw InvalidCoherenceError("coherence exceeds the positivity bound");
  const int dim = static_cast<int>(pair.psi_plus.size());
  const Operator num = number_op(dim);
  const double n_plus = pair.psi_plus.dot(num * pair.psi_plus).real();
  const double n_minus = pair.psi_minus.dot(num * pair.psi_minus).real();
  const double f_plus = qfi_pure(pair.psi_plus);
  const double f_minus = qfi_pure(pair.psi_minus);
  const double gap = n_plus - n_minus;
  return p * f_plus + (1.0 - p) * f_minus + 4.0 * std::norm(c) * gap * gap;
}

double qfi_fd_oracle(const DensityMatrix& rho, double dphi) {
  if (dphi <= 0.0) throw NumericalError("step must be positive");
  const int dim = static_cast<int>(rho.rows());
  auto estimate = [&](double d) {
    DensityMatrix rotated(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c)
        rotated(r, c) = rho(r, c) * std::exp(Complex(0.0, -d * (r - c)));
    const double f = fidelity(rho, rotated);
    return 8.0 * (1.0 - f) / (d * d);
  };
  const double coarse = estimate(dphi);
  const double fine = estimate(0.5 * dphi);
  const double value = (4.0 * fine - coarse) / 3.0;
  if (!std::isfinite(value)) throw NumericalError("oracle did not converge");
  return std::max(value, 0.0);
}

MultimodalReport qfi_multimodal_decomposition(
    const Ket& psi, const std::vector<std::pair<int, int>>& partition) {
  const int dim = static_cast<int>(psi.size());
  std::vector<bool> covered(dim, false);
  for (const auto& [lo, hi] : partition) {
    if (lo < 0 || hi >= dim || lo > hi)
      throw PartitionError("mode range outside the truncated space");
    for (int n = lo; n <= hi; ++n) {
      if (covered[n]) throw PartitionError("overlapping mode ranges");
      covered[n] = true;
    }
  }
  for (int n = 0; n < dim; ++n)
    if (!covered[n] && std::norm(psi(n)) > 1e-14)
      throw PartitionError("partition does not cover the state support");

  MultimodalReport report;
  for (const auto& [lo, hi] : partition) {
    ModeReport mode;
    double m1 = 0.0, m2 = 0.0;
    for (int n = lo; n <= hi; ++n) {
      const double w = std::norm(psi(n));
      mode.weight += w;
      m1 += n * w;
      m2 += static_cast<double>(n) * n * w;
    }
    if (mode.weight > 0.0) {
      mode.mean_n = m1 / mode.weight;
      const double var = m2 / mode.weight - mode.mean_n * mode.mean_n;
      mode.qfi = 4.0 * var;
    }
    report.modes.push_back(mode);
  }
  double total = 0.0, cross = 0.0;
  for (std::size_t k = 0; k < report.modes.size(); ++k) {
    total += report.modes[k].weight * report.modes[k].qfi;
    for (std::size_t l = k + 1; l < report.modes.size(); ++l) {
      const double gap = report.modes[k].mean_n - report.modes[l].mean_n;
      cross += 4.0 * report.modes[k].weight * report.modes[l].weight * gap * gap;
    }
  }
  report.cross_term = cross;
  report.total = total + cross;
  return report;
}

}  // namespace maser
