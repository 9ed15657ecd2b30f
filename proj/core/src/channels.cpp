#include "maser/channels.hpp"

#include <cmath>
#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "maser/errors.hpp"
#include "maser/fock.hpp"
#include "maser/linalg.hpp"
#include "maser/walls.hpp"

namespace maser {

ThermalAtomSpec ThermalAtomSpec::boltzmann(const double (&energy)[6],
                                           double kT) {
  double w[6], z = 0.0;
  for (int j = 0; j < 6; ++j) {
    w[j] = std::exp(-energy[j] / kT);
    z += w[j];
  }
  return {w[0] / z, w[1] / z, w[2] / z, w[3] / z, w[4] / z, w[5] / z};
}

KrausSet kraus_two_photon(const AtomState& atom, double phi, int dim) {
  Operator mg = Operator::Zero(dim, dim);
  Operator me = Operator::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) {
    // pair (n-2, n) is always interior; pair (n, n+2) hits the
    // truncation for the top two levels and acts as an exact wall there
    mg(n, n) = atom.c_g * ((n >= 2) ? cos_n(n - 2, phi) : 1.0);
    me(n, n) = atom.c_e * ((n + 2 < dim) ? cos_n(n, phi) : 1.0);
    if (n + 2 < dim) {
      const double s = sin_n(n, phi);
      mg(n + 2, n) = -I * atom.c_e * s;
      me(n, n + 2) = -I * atom.c_g * s;
    }
  }
  return {{mg, me}, {"M_g", "M_e"}};
}

KrausSet shifted_kraus(const KrausSet& kraus, const AtomState& atom) {
  const Eigen::Index dim = kraus.ops.at(0).rows();
  const Operator id = Operator::Identity(dim, dim);
  return {{kraus.ops.at(0) - atom.c_g * id, kraus.ops.at(1) + atom.c_e * id},
          {"shifted_g", "shifted_e"}};
}

Superoperator discrete_map(const KrausSet& kraus) {
  const Eigen::Index dim = kraus.ops.at(0).rows();
  Superoperator map = Superoperator::Zero(dim * dim, dim * dim);
  for (const Operator& m : kraus.ops) map += sandwich(m, m.adjoint());
  return map;
}

Superoperator generator_L0(const KrausSet& kraus, double nu) {
  return generator_from_map(discrete_map(kraus), nu);
}

Superoperator generator_from_map(const Superoperator& map, double nu) {
  return nu * (map - Superoperator::Identity(map.rows(), map.cols()));
}

Superoperator lindblad_generator(
    const Operator& h, const std::vector<std::pair<double, Operator>>& jumps) {
  Superoperator gen = commutator_superop(h);
  for (const auto& [rate, l] : jumps) gen += rate * dissipator(l);
  return gen;
}

Superoperator loss_dissipator(double kappa, double n_th, int dim) {
  const Operator a = annihilation_op(dim);
  Superoperator gen = kappa * (n_th + 1.0) * dissipator(a);
  if (n_th > 0.0) gen += kappa * n_th * dissipator(a.adjoint());
  return gen;
}

namespace {

Operator phase_unitary(int dim, double theta, double offset) {
  // exp(i theta (n + offset))
  Operator u = Operator::Zero(dim, dim);
  for (int n = 0; n < dim; ++n)
    u(n, n) = std::exp(I * theta * (double(n) + offset));
  return u;
}

void append_weighted(KrausSet& out, double p, const Operator& op,
                     const std::string& label) {
  if (p <= 0.0) return;
  out.ops.push_back(std::sqrt(p) * op);
  out.labels.push_back(label);
}

}  // namespace

KrausSet kraus_mixed_atom(const MixedAtomSpec& spec, double phi, double phi2,
                          double phi3, int dim) {
  KrausSet out;
  const KrausSet pair_a = kraus_two_photon(spec.atom, phi, dim);
  const AtomState atom_b{std::conj(spec.atom.c_e), -std::conj(spec.atom.c_g)};
  const KrausSet pair_b = kraus_two_photon(atom_b, phi, dim);
  append_weighted(out, spec.p_a, pair_a.ops[0], "M_ga");
  append_weighted(out, spec.p_a, pair_a.ops[1], "M_ea");
  append_weighted(out, spec.p_b, pair_b.ops[0], "M_gb");
  append_weighted(out, spec.p_b, pair_b.ops[1], "M_eb");
  append_weighted(out, spec.p_0, phase_unitary(dim, phi2, 0.0), "M_0");
  append_weighted(out, spec.p_2, phase_unitary(dim, -(phi2 + phi3), 1.0),
                  "M_2");
  append_weighted(out, spec.p_4, phase_unitary(dim, phi3, 1.0), "M_4");
  append_weighted(out, spec.p_aux, identity_op(dim), "M_aux");
  return out;
}

KrausSet kraus_thermal_atom(const ThermalAtomSpec& spec, double phi,
                            double phi2, double phi3, int dim) {
  KrausSet out;
  const KrausSet ground = kraus_two_photon({1.0, 0.0}, phi, dim);
  const KrausSet excited = kraus_two_photon({0.0, 1.0}, phi, dim);
  append_weighted(out, spec.p1, ground.ops[0], "M_gg");
  append_weighted(out, spec.p1, ground.ops[1], "M_eg");
  append_weighted(out, spec.p3, excited.ops[0], "M_ge");
  append_weighted(out, spec.p3, excited.ops[1], "M_ee");
  append_weighted(out, spec.p0, phase_unitary(dim, phi2, 0.0), "M_0");
  append_weighted(out, spec.p2, phase_unitary(dim, -(phi2 + phi3), 1.0),
                  "M_2");
  append_weighted(out, spec.p4, phase_unitary(dim, phi3, 1.0), "M_4");
  append_weighted(out, spec.pa, identity_op(dim), "M_aux");
  return out;
}

Superoperator weak_coupling_generator(const AtomState& atom, double phi,
                                      double nu, int dim) {
  if (std::abs(phi) * dim > 0.5)
    std::cerr << "weak_coupling_generator: |phi| n_max = "
              << std::abs(phi) * dim
              << " is not small; expansion may be inaccurate\n";
  const Operator a2 = annihilation_op(dim) * annihilation_op(dim);
  const Complex g2 = nu * std::conj(atom.c_g) * atom.c_e * phi;
  const double kappa2 = nu * std::norm(atom.c_g) * phi * phi;
  const Operator h = std::conj(g2) * a2 + g2 * a2.adjoint();
  return lindblad_generator(h, {{kappa2, a2}});
}

Superoperator weak_coupling_generator_mixed(const MixedAtomSpec& spec,
                                            double phi, double phi2,
                                            double phi3, double nu, int dim) {
  const Operator a2 = annihilation_op(dim) * annihilation_op(dim);
  const Operator n = number_op(dim);
  const Complex cg = spec.atom.c_g, ce = spec.atom.c_e;
  const Complex g2 = nu * (spec.p_a - spec.p_b) * std::conj(cg) * ce * phi;
  const double kappa2 =
      nu * phi * phi * (spec.p_a * std::norm(cg) + spec.p_b * std::norm(ce));
  const double gamma2 =
      nu * phi * phi * (spec.p_a * std::norm(ce) + spec.p_b * std::norm(cg));
  const double omega0 =
      nu * (phi2 * (spec.p_2 - spec.p_0) + phi3 * (spec.p_2 - spec.p_4));
  const double gamma0 =
      nu * (spec.p_0 * phi2 * phi2 + spec.p_2 * (phi2 + phi3) * (phi2 + phi3) +
            spec.p_4 * phi3 * phi3);
  const Operator h = std::conj(g2) * a2 + g2 * a2.adjoint() + omega0 * n;
  return lindblad_generator(
      h, {{kappa2, a2}, {gamma2, a2.adjoint()}, {gamma0, n}});
}

namespace {

void gauss_hermite(int order, std::vector<double>& nodes,
                   std::vector<double>& weights) {
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k)
    j(k - 1, k) = j(k, k - 1) = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
  if (es.info() != Eigen::Success)
    throw EigensolverError("Gauss-Hermite node computation failed");
  nodes.resize(order);
  weights.resize(order);
  for (int i = 0; i < order; ++i) {
    nodes[i] = es.eigenvalues()[i];
    const double v = es.eigenvectors()(0, i);
    weights[i] = std::sqrt(M_PI) * v * v;
  }
}

Superoperator beam_quadrature_map(const AtomState& atom, double phi_mean,
                                  double phi_sigma, int dim, int order) {
  std::vector<double> x, w;
  gauss_hermite(order, x, w);
  const Eigen::Index d2 = Eigen::Index(dim) * dim;
  Superoperator map = Superoperator::Zero(d2, d2);
  double total = 0.0;
  for (int i = 0; i < order; ++i) {
    const double phi = phi_mean + std::sqrt(2.0) * phi_sigma * x[i];
    if (phi <= 0.0) continue;  // truncated Gaussian
    const double weight = w[i] / std::sqrt(M_PI);
    map += weight * discrete_map(kraus_two_photon(atom, phi, dim));
    total += weight;
  }
  if (total <= 0.0)
    throw DegenerateError("beam_averaged_map: no quadrature mass at phi > 0");
  return map / total;
}

}  // namespace

Superoperator beam_averaged_map(const AtomState& atom, double phi_mean,
                                double phi_sigma, double nu, int dim,
                                const BeamScheme& scheme) {
  (void)nu;  // rate is carried by the caller's generator construction
  if (phi_sigma < 0.0)
    throw DegenerateError("beam_averaged_map: phi_sigma must be >= 0");
  if (phi_sigma == 0.0)
    return discrete_map(kraus_two_photon(atom, phi_mean, dim));
  if (scheme.kind == BeamScheme::GaussQuadrature) {
    const Superoperator coarse =
        beam_quadrature_map(atom, phi_mean, phi_sigma, dim, scheme.order);
    const Superoperator fine =
        beam_quadrature_map(atom, phi_mean, phi_sigma, dim, 2 * scheme.order);
    if ((coarse - fine).cwiseAbs().maxCoeff() > 1e-8)
      throw ConvergenceError(
          "beam_averaged_map: quadrature order insufficient");
    return fine;
  }
  std::mt19937_64 rng(scheme.seed);
  std::normal_distribution<double> dist(phi_mean, phi_sigma);
  const Eigen::Index d2 = Eigen::Index(dim) * dim;
  Superoperator map = Superoperator::Zero(d2, d2);
  for (int i = 0; i < scheme.samples; ++i) {
    double phi = dist(rng);
    while (phi <= 0.0) phi = dist(rng);
    map += discrete_map(kraus_two_photon(atom, phi, dim));
  }
  return map / double(scheme.samples);
}

namespace {

Complex sinc_c(Complex z) {
  if (std::abs(z) < 1e-6) return 1.0 - z * z / 6.0 + z * z * z * z / 120.0;
  return std::sin(z) / z;
}

// No-decay evolution kernels at time t: amplitudes for the atom to exit
// in level 1 (M_g) or level 3 (M_e) without a decay event, under the
// non-Hermitian pair blocks [[-i g1/2, h],[h, -i g3/2]].
std::pair<Operator, Operator> damped_kernels(const AtomState& atom,
                                             double lambda, double t,
                                             double g1, double g3, int dim) {
  Operator mg = Operator::Zero(dim, dim);
  Operator me = Operator::Zero(dim, dim);
  const double gbar = (g1 + g3) / 4.0;
  const double d = (g1 - g3) / 4.0;
  const Complex damp = std::exp(Complex(-gbar * t, 0.0));
  auto block = [&](double h, Complex& u11, Complex& u12, Complex& u22) {
    const Complex omega = std::sqrt(Complex(h * h - d * d, 0.0));
    const Complex ct = std::cos(omega * t);
    const Complex snc = t * sinc_c(omega * t);  // sin(omega t)/omega
    u11 = damp * (ct - d * snc);
    u22 = damp * (ct + d * snc);
    u12 = damp * (-I * h * snc);
  };
  Complex u11, u12, u22;
  for (int n = 0; n + 2 < dim; ++n) {
    block(lambda * std::sqrt(double(n + 1) * double(n + 2)), u11, u12, u22);
    mg(n + 2, n + 2) += u11 * atom.c_g;
    mg(n + 2, n) += u12 * atom.c_e;
    me(n, n + 2) += u12 * atom.c_g;
    me(n, n) += u22 * atom.c_e;
  }
  block(0.0, u11, u12, u22);
  for (int m = 0; m < 2 && m < dim; ++m) mg(m, m) += u11 * atom.c_g;
  for (int n = std::max(0, dim - 2); n < dim; ++n) me(n, n) += u22 * atom.c_e;
  return {mg, me};
}

}  // namespace

DecayModifiedMap decay_modified_map(const AtomState& atom, double lambda,
                                    double tau, double gamma1, double gamma3,
                                    double t_prep, int dim) {
  if (gamma1 < 0.0 || gamma3 < 0.0)
    throw DegenerateError("decay_modified_map: decay rates must be >= 0");
  const double wg = std::exp(-gamma1 * t_prep) * std::norm(atom.c_g);
  const double we = std::exp(-gamma3 * t_prep) * std::norm(atom.c_e);
  const double scale = wg + we;
  if (scale <= 0.0)
    throw DegenerateError("decay_modified_map: fully decayed atom state");
  const AtomState eff{
      std::exp(-gamma1 * t_prep / 2.0) * atom.c_g / std::sqrt(scale),
      std::exp(-gamma3 * t_prep / 2.0) * atom.c_e / std::sqrt(scale)};
  const auto [mg_tau, me_tau] =
      damped_kernels(eff, lambda, tau, gamma1, gamma3, dim);
  Superoperator map = sandwich(mg_tau, mg_tau.adjoint()) +
                      sandwich(me_tau, me_tau.adjoint());
  if (gamma1 > 0.0 || gamma3 > 0.0) {
    map += integrate_matrix(
        [&](double t) -> Operator {
          const auto [mg, me] =
              damped_kernels(eff, lambda, t, gamma1, gamma3, dim);
          return gamma1 * sandwich(mg, mg.adjoint()) +
                 gamma3 * sandwich(me, me.adjoint());
        },
        0.0, tau, 1e-10);
  }
  return {eff, scale, map};
}

namespace {

nlohmann::json matrix_json(const Operator& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      row.push_back({m(i, j).real(), m(i, j).imag()});
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string to_json(const KrausSet& kraus) {
  nlohmann::json j;
  j["labels"] = kraus.labels;
  nlohmann::json ops = nlohmann::json::array();
  for (const Operator& m : kraus.ops) ops.push_back(matrix_json(m));
  j["operators"] = ops;
  return j.dump();
}

std::string superop_to_json(const Superoperator& op) {
  nlohmann::json j;
  j["matrix"] = matrix_json(op);
  return j.dump();
}

}  // namespace maser
