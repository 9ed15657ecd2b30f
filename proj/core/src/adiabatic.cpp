#include "maser/adiabatic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "maser/errors.hpp"
#include "maser/fock.hpp"

namespace maser {

namespace {

constexpr Complex kZero{0.0, 0.0};

bool is_zero(Complex g) { return g.real() == 0.0 && g.imag() == 0.0; }

// |g|^2 / d; a vanishing coupling wins over a vanishing denominator.
double shift(Complex g, double d) {
  if (is_zero(g)) return 0.0;
  return std::norm(g) / d;
}

Complex ratio(Complex g, double d) {
  if (is_zero(g)) return kZero;
  return g / d;
}

double detuning_ratio(Complex g, double d) {
  if (is_zero(g)) return 0.0;
  if (d == 0.0) return std::numeric_limits<double>::infinity();
  return std::abs(g) / std::abs(d);
}

double rel_residual(double lhs, double rhs) {
  if (rhs == 0.0) {
    return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return lhs / rhs - 1.0;
}

void put_block(Operator& m, int dim, int row, int col, const Operator& block) {
  m.block(static_cast<Eigen::Index>(row) * dim,
          static_cast<Eigen::Index>(col) * dim, dim, dim) = block;
}

// g_a g_b (d_a - d_b) / (2 d_a d_b (d_a + d_b)), the second-order
// generator coefficient for a two-step path with detunings d_a, d_b.
Complex pair_coeff(Complex ga, Complex gb, double da, double db) {
  if (is_zero(ga) || is_zero(gb)) return kZero;
  const double denom = 2.0 * da * db * (da + db);
  if (denom == 0.0) {
    throw DegenerateError("adiabatic expansion singular: degenerate path");
  }
  return ga * gb * ((da - db) / denom);
}

void assert_anti_hermitian(const Operator& s, const char* name) {
  const double scale = std::max(1.0, s.norm());
  if ((s + s.adjoint()).norm() > 1e-12 * scale) {
    throw NumericalError(std::string(name) + " is not anti-Hermitian");
  }
}

}  // namespace

GeneralTwoPhotonParams EffectiveHamiltonian::as_general(double tau) const {
  GeneralTwoPhotonParams p;
  p.A = stark_g_slope;
  p.B = stark_g_const;
  p.C = coupling;
  p.D = stark_e_slope;
  p.E = stark_e_const;
  p.tau = tau;
  return p;
}

Operator EffectiveHamiltonian::matrix(int dim) const {
  Operator h = Operator::Zero(2 * dim, 2 * dim);
  for (int n = 0; n < dim; ++n) {
    h(n, n) = stark_g_const + stark_g_slope * n;
    h(dim + n, dim + n) = stark_e_const + stark_e_slope * n;
  }
  for (int n = 0; n + 2 < dim; ++n) {
    const double amp = std::sqrt((n + 1.0) * (n + 2.0));
    h(dim + n, n + 2) = coupling * amp;
    h(n + 2, dim + n) = std::conj(coupling) * amp;
  }
  return h;
}

EffectiveHamiltonian adiabatic_heff(const ModelParams& p) {
  EffectiveHamiltonian h;
  const double s1 = shift(p.g1, p.Delta1);
  const double s2 = shift(p.g2, p.Delta2);
  const double s3 = shift(p.g3, p.Delta3);
  const double s4 = shift(p.g4, p.Delta4);
  const double sG = shift(p.G, p.delta);
  h.stark_g_const = s1;
  h.stark_g_slope = s1 - s2;
  h.stark_e_slope = s3 - s4;
  // Off resonance the bare splitting of the excited level survives.
  h.stark_e_const = s3 - sG + (p.Delta2 + p.Delta3);
  if (!is_zero(p.g2) && !is_zero(p.g3)) {
    h.coupling =
        p.g2 * p.g3 * ((p.Delta2 - p.Delta3) / (2.0 * p.Delta2 * p.Delta3));
  }
  h.max_ratio = std::max({detuning_ratio(p.g1, p.Delta1),
                          detuning_ratio(p.g2, p.Delta2),
                          detuning_ratio(p.g3, p.Delta3),
                          detuning_ratio(p.g4, p.Delta4),
                          detuning_ratio(p.G, p.delta)});
  h.far_detuned = h.max_ratio <= 0.3;
  return h;
}

StarkResiduals stark_check(const ModelParams& p) {
  StarkResiduals r;
  const double base = shift(p.g2, p.Delta2);
  r.a = rel_residual(shift(p.g1, p.Delta1), base);
  r.b = rel_residual(shift(p.g4, p.Delta4), -shift(p.g3, p.Delta2));
  double rhs_c = 0.0;
  if (p.Delta2 != 0.0) rhs_c = -(std::norm(p.g2) + std::norm(p.g3)) / p.Delta2;
  r.c = rel_residual(shift(p.G, p.delta), rhs_c);
  r.pass = std::abs(r.a) < 1e-10 && std::abs(r.b) < 1e-10 &&
           std::abs(r.c) < 1e-10;
  return r;
}

TwoPhotonClass general_twophoton_classify(const GeneralTwoPhotonParams& p) {
  TwoPhotonClass cls;
  const double scale = std::max(
      {std::abs(p.A), std::abs(p.B), std::abs(p.D), std::abs(p.E),
       std::abs(p.C)});
  if (scale == 0.0) {
    cls.kind = TwoPhotonCase::CaseA;
    return cls;
  }
  const double tol = 1e-10 * scale;
  if (std::abs(p.A) <= tol && std::abs(p.D) <= tol &&
      std::abs(p.B - p.E) <= tol) {
    cls.kind = TwoPhotonCase::CaseA;
    return cls;
  }
  const bool coupling_matches =
      std::abs(std::norm(p.C) - p.A * p.D) <= 1e-10 * scale * scale;
  const bool positive = p.A * p.D > 0.0 && std::abs(p.A) > tol &&
                        std::abs(p.D) > tol && std::abs(p.C) > tol;
  const bool shifts_match =
      std::min(std::abs(p.B + p.D - p.E), std::abs(p.A + p.B + 2 * p.D - p.E)) <=
      tol;
  if (coupling_matches && positive && shifts_match) {
    cls.kind = TwoPhotonCase::CaseB;
    cls.recurrence_factor = -std::conj(p.C) / p.A;
    return cls;
  }
  if (std::abs(p.C) <= tol) {
    cls.kind = TwoPhotonCase::DephasingOnly;
    return cls;
  }
  cls.kind = TwoPhotonCase::NoPureState;
  return cls;
}

Ket caseb_stationary(const TwoPhotonClass& cls, const AtomState& atom,
                     int dim) {
  if (cls.kind != TwoPhotonCase::CaseB) {
    throw DegenerateError("recurrence state requires the squeezed-vacuum case");
  }
  if (is_zero(atom.c_g)) {
    throw DegenerateError("recurrence state diverges for a dark ground amplitude");
  }
  const Complex step = atom.c_e / atom.c_g * cls.recurrence_factor;
  if (std::abs(step) >= 1.0) {
    throw DegenerateError("recurrence state is not normalizable");
  }
  Ket psi = Ket::Zero(dim);
  psi(0) = 1.0;
  for (int n = 0; n + 2 < dim; n += 2) {
    psi(n + 2) = psi(n) * step * std::sqrt((n + 1.0) / (n + 2.0));
  }
  psi.normalize();
  return psi;
}

AdiabaticExpansion adiabatic_expansion(const ModelParams& p, int dim) {
  AdiabaticExpansion rec;
  const Operator a = annihilation_op(dim);
  const Operator ad = creation_op(dim);
  const Operator id = identity_op(dim);
  const Eigen::Index full = static_cast<Eigen::Index>(6) * dim;

  Operator s1 = Operator::Zero(full, full);
  const Complex r1 = ratio(p.g1, p.Delta1);
  const Complex r2 = ratio(p.g2, p.Delta2);
  const Complex r3 = ratio(p.g3, p.Delta3);
  const Complex r4 = ratio(p.g4, p.Delta4);
  const Complex rG = ratio(p.G, p.delta);
  put_block(s1, dim, 0, 1, -std::conj(r1) * ad);
  put_block(s1, dim, 1, 0, r1 * a);
  put_block(s1, dim, 1, 2, -std::conj(r2) * ad);
  put_block(s1, dim, 2, 1, r2 * a);
  put_block(s1, dim, 2, 3, -std::conj(r3) * ad);
  put_block(s1, dim, 3, 2, r3 * a);
  put_block(s1, dim, 3, 4, -std::conj(r4) * ad);
  put_block(s1, dim, 4, 3, r4 * a);
  put_block(s1, dim, 3, 5, -std::conj(rG) * id);
  put_block(s1, dim, 5, 3, rG * id);
  assert_anti_hermitian(s1, "S1");

  Operator s2 = Operator::Zero(full, full);
  const Complex c12 = pair_coeff(p.g1, p.g2, p.Delta1, p.Delta2);
  const Complex c34 = pair_coeff(p.g3, p.g4, p.Delta3, p.Delta4);
  Complex c3G = kZero;
  if (!is_zero(p.g3) && !is_zero(p.G)) {
    const double denom = 2.0 * p.Delta3 * p.delta * (p.delta + p.Delta3);
    if (denom == 0.0) {
      throw DegenerateError("adiabatic expansion singular: degenerate path");
    }
    c3G = p.g3 * p.G * ((p.Delta3 - p.delta) / denom);
  }
  Complex c4G = kZero;
  if (!is_zero(p.g4) && !is_zero(p.G)) {
    const double denom = 2.0 * p.Delta4 * p.delta * (p.delta - p.Delta4);
    if (denom == 0.0) {
      throw DegenerateError("adiabatic expansion singular: degenerate path");
    }
    c4G = std::conj(p.g4) * p.G * ((p.Delta4 + p.delta) / denom);
  }
  put_block(s2, dim, 0, 2, -std::conj(c12) * ad * ad);
  put_block(s2, dim, 2, 0, c12 * a * a);
  put_block(s2, dim, 2, 4, -std::conj(c34) * ad * ad);
  put_block(s2, dim, 4, 2, c34 * a * a);
  put_block(s2, dim, 2, 5, -std::conj(c3G) * ad);
  put_block(s2, dim, 5, 2, c3G * a);
  put_block(s2, dim, 4, 5, -std::conj(c4G) * a);
  put_block(s2, dim, 5, 4, c4G * ad);
  assert_anti_hermitian(s2, "S2");

  rec.S1 = std::move(s1);
  rec.S2 = std::move(s2);
  rec.delta_heff = Operator::Zero(2 * dim, 2 * dim);

  const double gmax =
      std::max({std::abs(p.g1), std::abs(p.g2), std::abs(p.g3),
                std::abs(p.g4)});
  if (gmax == 0.0) return rec;
  const double gtol = 1e-12 * gmax;
  const double dtol = 1e-12 * std::abs(p.Delta1);
  const bool couplings_equal = std::abs(p.g1 - p.g2) <= gtol &&
                               std::abs(p.g2 - p.g3) <= gtol &&
                               std::abs(p.g3 - p.g4) <= gtol;
  const bool detunings_match = std::abs(p.Delta1 - p.Delta2) <= dtol &&
                               std::abs(p.Delta1 + p.Delta3) <= dtol &&
                               std::abs(p.Delta1 + p.Delta4) <= dtol &&
                               p.Delta1 != 0.0;
  bool aux_matches = false;
  if (!is_zero(p.G) && p.delta != 0.0 && detunings_match) {
    const Complex lhs = p.G * p.G / p.delta;
    const Complex rhs = -2.0 * p.g1 * p.g1 / p.Delta1;
    aux_matches = std::abs(lhs - rhs) <= 1e-9 * std::abs(rhs);
  }
  rec.uniform = couplings_equal && detunings_match && aux_matches;
  if (!rec.uniform) return rec;

  const Complex g2c = p.g1 * p.g1;
  const Complex g4c = g2c * g2c;
  const Complex G2 = p.G * p.G;
  const double delta3 = std::pow(p.Delta1, 3);
  Operator h4 = Operator::Zero(2 * dim, 2 * dim);
  for (int n = 0; n < dim; ++n) {
    h4(n, n) = 4.0 * g4c * (n * (n - 3.0) - 1.0) / (3.0 * delta3);
    h4(dim + n, dim + n) =
        -4.0 * g4c * (4.0 * g2c - G2 * (n * (n + 1.0) + 1.0)) /
        (3.0 * G2 * delta3);
  }
  for (int n = 0; n + 2 < dim; ++n) {
    const Complex f =
        8.0 * g4c * (g2c + G2 * (n + 1.0)) / (3.0 * G2 * delta3);
    const double amp = std::sqrt((n + 1.0) * (n + 2.0));
    h4(n + 2, dim + n) = f * amp;
    h4(dim + n, n + 2) = std::conj(f) * amp;
  }
  if ((h4 - h4.adjoint()).norm() > 1e-12 * std::max(1.0, h4.norm())) {
    throw NumericalError("fourth-order diagonal correction is not Hermitian");
  }

  // Time average of h4 in the rotating frame of the second-order block:
  // in the eigenbasis of h2 each element picks up (e^{i w tau} - 1)/(i w tau).
  const Operator h2 = adiabatic_heff(p).matrix(dim);
  Eigen::SelfAdjointEigenSolver<Operator> es(h2);
  if (es.info() != Eigen::Success) {
    throw EigensolverError("eigendecomposition failed for the two-level block");
  }
  const Operator rot = es.eigenvectors().adjoint() * h4 * es.eigenvectors();
  Operator avg = Operator::Zero(2 * dim, 2 * dim);
  for (Eigen::Index i = 0; i < avg.rows(); ++i) {
    for (Eigen::Index j = 0; j < avg.cols(); ++j) {
      const double w = (es.eigenvalues()(i) - es.eigenvalues()(j)) * p.tau;
      Complex window{1.0, 0.0};
      if (w != 0.0) window = (std::exp(Complex(0.0, w)) - 1.0) / Complex(0.0, w);
      avg(i, j) = rot(i, j) * window;
    }
  }
  rec.delta_heff =
      es.eigenvectors() * avg * es.eigenvectors().adjoint();
  return rec;
}

KrausSet higher_order_kraus(const ModelParams& p, const AtomState& atom,
                            int dim, KrausOrder order) {
  if (order == KrausOrder::ExactBlock) return full_model_map(p, atom, dim);

  const double tau = p.tau;
  const Complex cg = atom.c_g;
  const Complex ce = atom.c_e;
  const Operator a = annihilation_op(dim);
  const Operator ad = creation_op(dim);
  const Operator id = identity_op(dim);

  const Operator h2 = adiabatic_heff(p).matrix(dim);
  Eigen::SelfAdjointEigenSolver<Operator> es(h2);
  if (es.info() != Eigen::Success) {
    throw EigensolverError("eigendecomposition failed for the two-level block");
  }
  Eigen::VectorXcd phases(es.eigenvalues().size());
  for (Eigen::Index i = 0; i < phases.size(); ++i) {
    phases(i) = std::exp(Complex(0.0, -tau * es.eigenvalues()(i)));
  }
  const Operator u2 = es.eigenvectors() * phases.asDiagonal() *
                      es.eigenvectors().adjoint();
  const Operator u11 = u2.block(0, 0, dim, dim);
  const Operator u13 = u2.block(0, dim, dim, dim);
  const Operator u31 = u2.block(dim, 0, dim, dim);
  const Operator u33 = u2.block(dim, dim, dim, dim);
  const Operator mg = cg * u11 + ce * u13;
  const Operator me = cg * u31 + ce * u33;

  const Complex r1 = ratio(p.g1, p.Delta1);
  const Complex r2 = ratio(p.g2, p.Delta2);
  const Complex r3 = ratio(p.g3, p.Delta3);
  const Complex r4 = ratio(p.g4, p.Delta4);
  const Complex rG = ratio(p.G, p.delta);
  const double s1 = shift(p.g1, p.Delta1);
  const double s2 = shift(p.g2, p.Delta2);
  const double s3 = shift(p.g3, p.Delta3);
  const double s4 = shift(p.g4, p.Delta4);
  const double sG = shift(p.G, p.delta);
  const double q1 = std::norm(r1);
  const double q2 = std::norm(r2);
  const double q3 = std::norm(r3);
  const double q4 = std::norm(r4);
  const double qG = std::norm(rG);

  // Exact phase propagators of the eliminated levels (free energy plus the
  // second-order diagonal shift), with the ground-level offset stripped.
  Eigen::VectorXcd u00(dim);
  Eigen::VectorXcd u22(dim);
  Eigen::VectorXcd u44(dim);
  for (int n = 0; n < dim; ++n) {
    u00(n) = std::exp(Complex(0.0, tau * (p.Delta1 + n * s1)));
    u22(n) = std::exp(Complex(0.0, -tau * (p.Delta2 + (n + 1.0) * s2 - n * s3)));
    u44(n) = std::exp(Complex(
        0.0, -tau * (p.Delta2 + p.Delta3 + p.Delta4 + (n + 1.0) * s4)));
  }
  const Complex uaa =
      std::exp(Complex(0.0, -tau * (p.Delta2 + p.Delta3 + p.delta + sG)));

  Eigen::VectorXcd k1(dim);
  Eigen::VectorXcd k3(dim);
  for (int n = 0; n < dim; ++n) {
    k1(n) = -(n + 1.0) * q1 - n * q2;
    k3(n) = -(n + 1.0) * q3 - n * q4 - qG;
  }

  const AdiabaticExpansion rec = adiabatic_expansion(p, dim);
  const Operator dpsi1 = cg * rec.delta_heff.block(0, 0, dim, dim) +
                         ce * rec.delta_heff.block(0, dim, dim, dim);
  const Operator dpsi3 = cg * rec.delta_heff.block(dim, 0, dim, dim) +
                         ce * rec.delta_heff.block(dim, dim, dim, dim);
  const Complex mitau{0.0, -tau};
  const Operator dt1 = mitau * (u11 * dpsi1 + u13 * dpsi3);
  const Operator dt3 = mitau * (u31 * dpsi1 + u33 * dpsi3);

  const Operator bracket22 = cg * r2 * a - ce * std::conj(r3) * ad;
  const Complex cross = std::conj(p.g2 * p.g3);
  Complex pair13 = kZero;
  if (!is_zero(p.g2) && !is_zero(p.g3)) {
    pair13 = cross / (p.Delta2 * p.Delta3);
  }

  KrausSet set;
  set.ops.resize(6);
  set.labels = {"M_0", "M_1", "M_2", "M_3", "M_4", "M_a"};

  set.ops[0] = std::conj(r1) * (ad * mg) -
               cg * std::conj(r1) * (u00.asDiagonal() * ad);
  set.ops[2] = -r2 * (a * mg) + std::conj(r3) * (ad * me) +
               u22.asDiagonal() * bracket22;
  set.ops[4] = -r4 * (a * me) + ce * r4 * (u44.asDiagonal() * a);
  set.ops[5] = -rG * me + ce * rG * uaa * id;

  set.ops[1] = mg + 0.5 * (k1.asDiagonal() * mg) +
               0.5 * pair13 * (ad * ad * me) +
               0.5 * (u11 * (cg * Operator(k1.asDiagonal()) +
                             ce * pair13 * (ad * ad))) +
               0.5 * (u13 * (ce * Operator(k3.asDiagonal()) +
                             cg * std::conj(pair13) * (a * a))) +
               cg * q1 * (a * (u00.asDiagonal() * ad)) +
               std::conj(r2) * (ad * (u22.asDiagonal() * bracket22)) + dt1;
  set.ops[3] = me + 0.5 * (k3.asDiagonal() * me) +
               0.5 * std::conj(pair13) * (a * a * mg) +
               0.5 * (u31 * (cg * Operator(k1.asDiagonal()) +
                             ce * pair13 * (ad * ad))) +
               0.5 * (u33 * (ce * Operator(k3.asDiagonal()) +
                             cg * std::conj(pair13) * (a * a))) -
               r3 * (a * (u22.asDiagonal() * bracket22)) +
               ce * q4 * (ad * (u44.asDiagonal() * a)) +
               ce * qG * uaa * id + dt3;

  const Complex frame = std::exp(Complex(0.0, -tau * p.Delta1));
  for (auto& op : set.ops) op = frame * op;
  return set;
}

}  // namespace maser
