#include "maser/linalg.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <vector>

#include "maser/errors.hpp"

namespace maser {

Operator kron(const Operator& a, const Operator& b) {
  Operator out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

Ket vec(const Operator& x) {
  return Eigen::Map<const Ket>(x.data(), x.size());
}

Operator unvec(const Ket& v, Eigen::Index rows) {
  return Eigen::Map<const Operator>(v.data(), rows, v.size() / rows);
}

Superoperator sandwich(const Operator& a, const Operator& b) {
  return kron(b.transpose(), a);
}

Superoperator dissipator(const Operator& l) {
  const Operator ldl = l.adjoint() * l;
  const Operator id = Operator::Identity(l.rows(), l.cols());
  return sandwich(l, l.adjoint()) - 0.5 * sandwich(ldl, id) -
         0.5 * sandwich(id, ldl);
}

Superoperator commutator_superop(const Operator& h) {
  const Operator id = Operator::Identity(h.rows(), h.cols());
  return Complex(0, -1) * (sandwich(h, id) - sandwich(id, h));
}

namespace {

// Pade-13 coefficients for expm.
constexpr double kPade13[] = {
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0,  129060195264000.0,   10559470521600.0,
    670442572800.0,      33522128640.0,       1323241920.0,
    40840800.0,          960960.0,            16380.0,
    182.0,               1.0};

}  // namespace

Operator expm(const Operator& a) {
  const Eigen::Index n = a.rows();
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();
  int squarings = 0;
  const double theta13 = 5.371920351148152;
  Operator as = a;
  if (norm > theta13) {
    squarings = std::max(0, static_cast<int>(
                                std::ceil(std::log2(norm / theta13))));
    as /= std::pow(2.0, squarings);
  }
  const Operator id = Operator::Identity(n, n);
  const Operator a2 = as * as;
  const Operator a4 = a2 * a2;
  const Operator a6 = a2 * a4;
  const Operator u =
      as * (a6 * (kPade13[13] * a6 + kPade13[11] * a4 + kPade13[9] * a2) +
            kPade13[7] * a6 + kPade13[5] * a4 + kPade13[3] * a2 +
            kPade13[1] * id);
  const Operator v =
      a6 * (kPade13[12] * a6 + kPade13[10] * a4 + kPade13[8] * a2) +
      kPade13[6] * a6 + kPade13[4] * a4 + kPade13[2] * a2 + kPade13[0] * id;
  Operator r = (v - u).partialPivLu().solve(v + u);
  for (int i = 0; i < squarings; ++i) r = r * r;
  return r;
}

namespace {

// One Arnoldi sweep: returns exp(tH_m)·e1 mapped back, plus an error
// estimate from the last subdiagonal element.
Ket krylov_step(const Superoperator& a, const Ket& v, double t, int m,
                double* err) {
  const double beta = v.norm();
  if (beta == 0.0) {
    *err = 0.0;
    return v;
  }
  const Eigen::Index n = v.size();
  m = static_cast<int>(std::min<Eigen::Index>(m, n));
  Eigen::MatrixXcd basis(n, m + 1);
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(m + 1, m);
  basis.col(0) = v / beta;
  int mk = m;
  for (int j = 0; j < m; ++j) {
    Ket w = a * basis.col(j);
    for (int i = 0; i <= j; ++i) {
      h(i, j) = basis.col(i).dot(w);
      w -= h(i, j) * basis.col(i);
    }
    // re-orthogonalize once for stability
    for (int i = 0; i <= j; ++i) {
      const Complex c = basis.col(i).dot(w);
      h(i, j) += c;
      w -= c * basis.col(i);
    }
    h(j + 1, j) = w.norm();
    if (std::abs(h(j + 1, j)) < 1e-14) {
      mk = j + 1;
      break;
    }
    basis.col(j + 1) = w / h(j + 1, j);
  }
  const Operator hm = t * h.topLeftCorner(mk, mk);
  const Operator eh = expm(hm);
  Ket y = beta * (basis.leftCols(mk) * eh.col(0));
  *err = (mk < m) ? 0.0
                  : std::abs(h(mk, mk - 1)) * std::abs(eh(mk - 1, 0)) * beta *
                        std::abs(t);
  return y;
}

}  // namespace

Ket expm_multiply(const Superoperator& a, const Ket& v, double t,
                  int krylov_dim, double tol) {
  double done = 0.0;
  double dt = t;
  Ket y = v;
  int fails = 0;
  while (done < t) {
    dt = std::min(dt, t - done);
    double err = 0.0;
    Ket trial = krylov_step(a, y, dt, krylov_dim, &err);
    if (err > tol * std::max(1.0, trial.norm())) {
      dt /= 2.0;
      if (++fails > 60)
        throw ConvergenceError("Krylov propagator failed to reach tolerance");
      continue;
    }
    y = trial;
    done += dt;
    if (err < 0.1 * tol) dt *= 2.0;
  }
  return y;
}

namespace {

Operator simpson_recurse(const std::function<Operator(double)>& f, double a,
                         double b, const Operator& fa, const Operator& fm,
                         const Operator& fb, const Operator& whole, double tol,
                         int depth, int max_depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const Operator flm = f(lm);
  const Operator frm = f(rm);
  const Operator left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const Operator right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const Operator delta = left + right - whole;
  if (delta.cwiseAbs().maxCoeff() <= 15.0 * tol)
    return left + right + delta / 15.0;
  if (depth >= max_depth)
    throw ConvergenceError("adaptive quadrature exceeded maximum depth");
  return simpson_recurse(f, a, m, fa, flm, fm, left, tol / 2.0, depth + 1,
                         max_depth) +
         simpson_recurse(f, m, b, fm, frm, fb, right, tol / 2.0, depth + 1,
                         max_depth);
}

}  // namespace

Operator integrate_matrix(const std::function<Operator(double)>& f, double a,
                          double b, double tol, int max_depth) {
  const Operator fa = f(a);
  const Operator fb = f(b);
  const Operator fm = f(0.5 * (a + b));
  const Operator whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 0, max_depth);
}

HermEigen herm_eigen(const Operator& a, double clip, double clip_fail) {
  Eigen::SelfAdjointEigenSolver<Operator> solver(a);
  if (solver.info() != Eigen::Success)
    throw EigensolverError("Hermitian eigendecomposition failed");
  HermEigen out{solver.eigenvalues(), solver.eigenvectors()};
  (void)clip;
  for (Eigen::Index i = 0; i < out.values.size(); ++i) {
    if (out.values[i] < 0.0) {
      if (out.values[i] < -clip_fail)
        throw NumericalError("matrix is not positive semidefinite");
      out.values[i] = 0.0;
    }
  }
  return out;
}

Operator herm_sqrt(const Operator& a) {
  const HermEigen eig = herm_eigen(a);
  return eig.vectors * eig.values.cwiseSqrt().asDiagonal() *
         eig.vectors.adjoint();
}

double trace_distance(const DensityMatrix& rho, const DensityMatrix& sigma) {
  const Operator d = rho - sigma;
  Eigen::SelfAdjointEigenSolver<Operator> solver(d);
  if (solver.info() != Eigen::Success)
    throw EigensolverError("trace distance eigendecomposition failed");
  return 0.5 * solver.eigenvalues().cwiseAbs().sum();
}

}  // namespace maser
