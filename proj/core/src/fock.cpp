#include "maser/fock.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "maser/errors.hpp"
#include "maser/linalg.hpp"

namespace maser {

Operator annihilation_op(int dim) {
  Operator a = Operator::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(double(n));
  return a;
}

Operator creation_op(int dim) { return annihilation_op(dim).adjoint(); }

Operator number_op(int dim) {
  Operator n = Operator::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) n(k, k) = double(k);
  return n;
}

Operator parity_op(int dim) {
  Operator p = Operator::Zero(dim, dim);
  for (int k = 0; k < dim; ++k) p(k, k) = (k % 2 == 0) ? 1.0 : -1.0;
  return p;
}

Operator identity_op(int dim) { return Operator::Identity(dim, dim); }

double coherent_tail_mass(int dim, Complex alpha) {
  const double x = std::norm(alpha);
  // head = e^{-x} sum_{n<dim} x^n/n!, accumulated in scaled form
  double term = std::exp(-x);
  double head = term;
  for (int n = 1; n < dim; ++n) {
    term *= x / n;
    head += term;
  }
  return std::max(0.0, 1.0 - head);
}

namespace {

void check_tail(int dim, Complex alpha, const char* what) {
  const double tail = coherent_tail_mass(dim, alpha);
  if (tail >= 1e-8) {
    std::ostringstream msg;
    msg << what << ": coherent tail mass " << tail << " beyond n_max=" << dim
        << " exceeds 1e-8 for |alpha|=" << std::abs(alpha);
    throw TruncationError(msg.str());
  }
}

}  // namespace

Operator displacement_op(int dim, Complex alpha) {
  if (alpha == Complex(0.0, 0.0)) return identity_op(dim);
  check_tail(dim, alpha, "displacement_op");
  const Operator gen =
      alpha * creation_op(dim) - std::conj(alpha) * annihilation_op(dim);
  return expm(gen);
}

Ket fock_state(int dim, int n) {
  Ket psi = Ket::Zero(dim);
  psi[n] = 1.0;
  return psi;
}

Ket coherent_state(int dim, Complex alpha) {
  check_tail(dim, alpha, "coherent_state");
  Ket psi(dim);
  Complex amp = std::exp(-0.5 * std::norm(alpha));
  psi[0] = amp;
  for (int n = 1; n < dim; ++n) {
    amp *= alpha / std::sqrt(double(n));
    psi[n] = amp;
  }
  return psi;
}

Ket cat_state(int dim, Complex alpha, int parity) {
  if (parity != 1 && parity != -1)
    throw DegenerateError("cat_state: parity must be +1 or -1");
  if (parity == -1 && alpha == Complex(0.0, 0.0))
    throw DegenerateError("cat_state: odd cat undefined at alpha=0");
  const Ket plus = coherent_state(dim, alpha);
  const Ket minus = coherent_state(dim, -alpha);
  const double s = (parity == 1) ? 1.0 : -1.0;
  const double norm2 = 2.0 + 2.0 * s * std::exp(-2.0 * std::norm(alpha));
  return (plus + s * minus) / std::sqrt(norm2);
}

DensityMatrix projector(const Ket& psi) { return psi * psi.adjoint(); }

double expval(const DensityMatrix& rho, const Operator& op) {
  return (op * rho).trace().real();
}

double photon_mean(const DensityMatrix& rho) {
  double mean = 0.0;
  for (Eigen::Index n = 0; n < rho.rows(); ++n)
    mean += double(n) * rho(n, n).real();
  return mean;
}

double photon_variance(const DensityMatrix& rho) {
  double m1 = 0.0, m2 = 0.0;
  for (Eigen::Index n = 0; n < rho.rows(); ++n) {
    m1 += double(n) * rho(n, n).real();
    m2 += double(n) * double(n) * rho(n, n).real();
  }
  return m2 - m1 * m1;
}

double purity(const DensityMatrix& rho) {
  return (rho * rho).trace().real();
}

double fidelity(const DensityMatrix& rho, const DensityMatrix& sigma) {
  const Operator root = herm_sqrt(rho);
  const Operator inner = root * sigma * root;
  const HermEigen eig = herm_eigen((inner + inner.adjoint()) / 2.0);
  double f = 0.0;
  for (Eigen::Index i = 0; i < eig.values.size(); ++i)
    f += std::sqrt(eig.values[i]);
  return std::min(1.0, f);
}

namespace {

// Exact infinite-space matrix elements <n|D(beta)|m> for n,m < dim,
// built row by row from the first row; no truncation error enters.
Operator displacement_exact_block(int dim, Complex beta) {
  Operator d(dim, dim);
  const double scale = std::exp(-0.5 * std::norm(beta));
  Complex amp = scale;
  d(0, 0) = amp;
  for (int m = 1; m < dim; ++m) {
    amp *= -std::conj(beta) / std::sqrt(double(m));
    d(0, m) = amp;
  }
  for (int n = 0; n + 1 < dim; ++n) {
    const double rn = std::sqrt(double(n + 1));
    for (int m = 0; m < dim; ++m) {
      Complex v = beta * d(n, m);
      if (m > 0) v += std::sqrt(double(m)) * d(n, m - 1);
      d(n + 1, m) = v / rn;
    }
  }
  return d;
}

}  // namespace

WignerGrid wigner(const DensityMatrix& rho, const WignerGrid& spec) {
  WignerGrid grid = spec;
  const int res = grid.resolution;
  const int dim = int(rho.rows());
  grid.values.resize(res, res);
  const Operator p = parity_op(dim);
  const DensityMatrix rho_p = rho * p;
  for (int i = 0; i < res; ++i) {
    const double re =
        grid.re_min + (grid.re_max - grid.re_min) * i / double(res - 1);
    for (int j = 0; j < res; ++j) {
      const double im =
          grid.im_min + (grid.im_max - grid.im_min) * j / double(res - 1);
      const Complex alpha(re, im);
      const Operator d2 = displacement_exact_block(dim, 2.0 * alpha);
      // (2/pi) Tr[rho D(2a) P] = (2/pi) sum_{n,m} D_{nm} (rho P)_{mn}
      Complex tr = 0.0;
      for (int n = 0; n < dim; ++n)
        for (int m = 0; m < dim; ++m) tr += d2(n, m) * rho_p(m, n);
      grid.values(i, j) = (2.0 / M_PI) * tr.real();
    }
  }
  return grid;
}

double wigner_norm(const WignerGrid& grid) {
  const double dre =
      (grid.re_max - grid.re_min) / double(grid.resolution - 1);
  const double dim_step =
      (grid.im_max - grid.im_min) / double(grid.resolution - 1);
  return grid.values.sum() * dre * dim_step;
}

void write_csv(const WignerGrid& grid, std::ostream& os) {
  os << "# re_min=" << grid.re_min << " re_max=" << grid.re_max
     << " im_min=" << grid.im_min << " im_max=" << grid.im_max
     << " resolution=" << grid.resolution << "\n";
  os << "re,im,w\n";
  os.precision(17);
  for (int i = 0; i < grid.resolution; ++i) {
    const double re = grid.re_min +
                      (grid.re_max - grid.re_min) * i /
                          double(grid.resolution - 1);
    for (int j = 0; j < grid.resolution; ++j) {
      const double im = grid.im_min +
                        (grid.im_max - grid.im_min) * j /
                            double(grid.resolution - 1);
      os << re << "," << im << "," << grid.values(i, j) << "\n";
    }
  }
}

std::string to_json(const WignerGrid& grid) {
  nlohmann::json j;
  j["re_min"] = grid.re_min;
  j["re_max"] = grid.re_max;
  j["im_min"] = grid.im_min;
  j["im_max"] = grid.im_max;
  j["resolution"] = grid.resolution;
  std::vector<std::vector<double>> rows(grid.resolution);
  for (int i = 0; i < grid.resolution; ++i) {
    rows[i].resize(grid.resolution);
    for (int k = 0; k < grid.resolution; ++k) rows[i][k] = grid.values(i, k);
  }
  j["values"] = rows;
  return j.dump();
}

}  // namespace maser
