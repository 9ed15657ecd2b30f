#include <maser/meta.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <maser/errors.hpp>
#include <maser/fock.hpp>
#include <maser/linalg.hpp>

namespace maser {

namespace {

Complex coherence_functional(const ConservedCoherence& coh, const Operator& op) {
  return (coh.L_pm * op).trace();
}

const Operator& find_op(const KrausSet& set, const std::string& label) {
  for (std::size_t i = 0; i < set.labels.size(); ++i)
    if (set.labels[i] == label) return set.ops[i];
  throw DegenerateError("Kraus set lacks operator " + label);
}

void check_eta(const Complex& eta) {
  if (std::abs(eta) > 1.0 + 1e-6)
    throw NumericalError("coherence backaction factor exceeds 1");
}

Eigen::Matrix4cd dfs_matrix(double rate_plus, double rate_minus, Complex coh_diag,
                            Complex cross) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = -rate_plus;
  m(0, 1) = rate_minus;
  m(1, 0) = rate_plus;
  m(1, 1) = -rate_minus;
  m(2, 2) = coh_diag;
  m(2, 3) = cross;
  m(3, 2) = std::conj(cross);
  m(3, 3) = std::conj(coh_diag);
  return m;
}

}  // namespace

DfsGenerator eff_loss_generator(const StationaryPair& pair,
                                const ConservedCoherence& coherence,
                                double kappa) {
  if (kappa < 0.0) throw DegenerateError("negative loss rate");
  const int dim = static_cast<int>(pair.psi_plus.size());
  const Operator a = annihilation_op(dim);
  const Operator num = number_op(dim);

  DfsGenerator gen;
  gen.n_plus = pair.psi_plus.dot(num * pair.psi_plus).real();
  gen.n_minus = pair.psi_minus.dot(num * pair.psi_minus).real();
  const double geo = std::sqrt(gen.n_plus * gen.n_minus);
  if (geo > 0.0) {
    const Operator hopped =
        a * (pair.psi_minus * pair.psi_plus.adjoint()) * a.adjoint();
    gen.eta = coherence_functional(coherence, hopped) / geo;
    check_eta(gen.eta);
  }
  gen.matrix = dfs_matrix(kappa * gen.n_plus, kappa * gen.n_minus,
                          Complex(-0.5 * kappa * (gen.n_plus + gen.n_minus), 0.0),
                          kappa * gen.eta * geo);
  return gen;
}

DfsGenerator eff_correction_generator(const StationaryPair& pair,
                                      const ConservedCoherence& coherence,
                                      const KrausSet& higher, double nu) {
  if (nu < 0.0) throw DegenerateError("negative atom rate");
  const int dim = static_cast<int>(pair.psi_plus.size());
  const Operator* swap_ops[3] = {&find_op(higher, "M_0"), &find_op(higher, "M_2"),
                                 &find_op(higher, "M_4")};

  DfsGenerator gen;
  Operator x = Operator::Zero(dim, dim);
  for (const Operator* m : swap_ops) x += m->adjoint() * (*m);
  gen.X_plus = pair.psi_plus.dot(x * pair.psi_plus).real();
  gen.X_minus = pair.psi_minus.dot(x * pair.psi_minus).real();

  const double geo = std::sqrt(gen.X_plus * gen.X_minus);
  if (geo > 0.0) {
    Operator swapped = Operator::Zero(dim, dim);
    const Operator base = pair.psi_minus * pair.psi_plus.adjoint();
    for (const Operator* m : swap_ops) swapped += (*m) * base * m->adjoint();
    gen.eta = coherence_functional(coherence, swapped) / geo;
    check_eta(gen.eta);
  }

  // Rotation frequency from the channel difference against the ideal
  // two-photon map; channel-level evaluation is frame-phase invariant.
  const KrausSet ideal = kraus_two_photon(pair.atom, pair.phi, dim);
  const Operator cross = pair.psi_plus * pair.psi_minus.adjoint();
  Operator delta = Operator::Zero(dim, dim);
  for (const Operator& m : higher.ops) delta += m * cross * m.adjoint();
  for (const Operator& m : ideal.ops) delta -= m * cross * m.adjoint();
  const Complex z = nu * coherence_functional(coherence, delta);
  gen.Omega = -z.imag();

  gen.matrix = dfs_matrix(
      nu * gen.X_plus, nu * gen.X_minus,
      Complex(-0.5 * nu * (gen.X_plus + gen.X_minus), -gen.Omega),
      nu * gen.eta * geo);
  return gen;
}

double x_expectation_closed_form(const ModelParams& p, const AtomState& atom,
                                 const Ket& psi) {
  const int dim = static_cast<int>(psi.size());
  const double g2sq = std::norm(p.g2), g3sq = std::norm(p.g3);
  const double cg2 = std::norm(atom.c_g), ce2 = std::norm(atom.c_e);
  const double d = p.Delta2;
  if (d == 0.0 || p.Delta1 == 0.0 || p.Delta4 == 0.0)
    throw DegenerateError("closed form needs nonzero detunings");

  auto diag_expect = [&](auto f) {
    double s = 0.0;
    for (int n = 0; n < dim; ++n) s += f(n) * std::norm(psi(n));
    return s;
  };
  const double t1 = 2.0 * cg2 * g2sq / (d * p.Delta1) * diag_expect([&](int n) {
    return (n + 1.0) * (1.0 - std::cos(p.tau * p.Delta1 + p.tau * g2sq / d * (n + 2.0)));
  });
  const double t2 = 2.0 * cg2 * g2sq / (d * d) * diag_expect([&](int n) {
    return n * (1.0 - std::cos(p.tau * d + p.tau * (g2sq + g3sq) / d * (n - 1.0)));
  });
  const double t3 = 2.0 * ce2 * g3sq / (d * d) * diag_expect([&](int n) {
    return (n + 1.0) * (1.0 + std::cos(p.tau * d + p.tau * (g2sq + g3sq) / d * (n + 1.0)));
  });
  const double t4 = -2.0 * ce2 * g3sq / (d * p.Delta4) * diag_expect([&](int n) {
    return n * (1.0 + std::cos(p.tau * (p.Delta4 - g2sq / d - g3sq / d * n)));
  });

  // cross term <(a^dag)^2 sin(...)>: couples the two atom amplitudes
  Complex cross_sum{0.0, 0.0};
  for (int n = 0; n + 2 < dim; ++n) {
    const double amp = std::sqrt((n + 1.0) * (n + 2.0));
    const double s = std::sin(p.tau * d + p.tau * (n + 1.0) * (g2sq + g3sq) / d);
    cross_sum += std::conj(psi(n + 2)) * amp * s * psi(n);
  }
  const Complex coeff = Complex(0.0, -1.0) * std::conj(atom.c_g) * atom.c_e *
                        std::conj(p.g2) * p.g3 / (d * d);
  const double t5 = 4.0 * std::real(coeff * cross_sum);

  return t1 + t2 + t3 + t4 + t5;
}

std::pair<double, double> eff_dephasing_rate(const Superoperator& perturbed_map,
                                             const Superoperator& base_map,
                                             const StationaryPair& pair,
                                             const ConservedCoherence& coherence,
                                             double nu) {
  const int dim = static_cast<int>(pair.psi_plus.size());
  if (perturbed_map.rows() != dim * dim || base_map.rows() != dim * dim)
    throw DegenerateError("map dimension does not match the stationary pair");
  const Operator cross = pair.psi_plus * pair.psi_minus.adjoint();
  const Eigen::VectorXcd image = (perturbed_map - base_map) * vec(cross);
  const Complex z = nu * coherence_functional(coherence, unvec(image, dim));
  const double gamma = -z.real();
  const double omega = -z.imag();
  if (gamma < -1e-10)
    throw NumericalError("negative dephasing rate: perturbation is not a valid channel difference");
  return {omega, gamma};
}

double beam_dephasing_bound(const StationaryPair& pair, double variance,
                            double nu) {
  if (variance < 0.0) throw DegenerateError("negative beam variance");
  const int dim = static_cast<int>(pair.psi_plus.size());
  auto pair_moment = [&](const Ket& psi, bool lowering) {
    double s = 0.0;
    for (int n = 0; n < dim; ++n) {
      const double w =
          lowering ? static_cast<double>(n) * (n - 1.0) : (n + 1.0) * (n + 2.0);
      s += w * std::norm(psi(n));
    }
    return s;
  };
  const double low = std::pow(std::sqrt(pair_moment(pair.psi_plus, true)) +
                                  std::sqrt(pair_moment(pair.psi_minus, true)),
                              2);
  const double high = std::pow(std::sqrt(pair_moment(pair.psi_plus, false)) +
                                   std::sqrt(pair_moment(pair.psi_minus, false)),
                               2);
  return nu * 0.5 * variance *
         (std::norm(pair.atom.c_g) * low + std::norm(pair.atom.c_e) * high);
}

DecayBounds decay_bounds(const AtomState& atom, const DecayRates& rates,
                         double T_prep, double tau, double nu) {
  const double all[6] = {rates.gamma_01, rates.gamma_03, rates.gamma_13,
                         rates.gamma_23, rates.gamma_1_unc, rates.gamma_3_unc};
  for (double r : all)
    if (r < 0.0) throw DegenerateError("negative decay rate");
  if (T_prep < 0.0 || tau < 0.0) throw DegenerateError("negative time");

  const double cg2 = std::norm(atom.c_g), ce2 = std::norm(atom.c_e);
  const double G1 = rates.Gamma1(), G3 = rates.Gamma3();
  DecayBounds b;
  b.gamma_deph_bound =
      nu * (2.0 *
                ((G1 - rates.gamma_1_unc) * cg2 +
                 2.0 * (G3 - rates.gamma_3_unc - rates.gamma_13 * cg2) * ce2) *
                T_prep +
            2.0 * std::max(G1, G3) * tau);
  b.omega_bound =
      nu * ((rates.gamma_01 * cg2 + (rates.gamma_03 + rates.gamma_23) * ce2) * T_prep +
            (rates.gamma_01 + rates.gamma_03 + rates.gamma_23) * tau);
  b.nu_reduced =
      nu * (1.0 - (rates.gamma_1_unc * cg2 + rates.gamma_3_unc * ce2) * T_prep);
  return b;
}

DfsClassification dfs_eigen_and_classical(const DfsGenerator& gen,
                                          const StationaryPair& pair) {
  DfsClassification res;
  Eigen::ComplexEigenSolver<Eigen::Matrix4cd> es(gen.matrix);
  if (es.info() != Eigen::Success) throw EigensolverError("4x4 eigensolve failed");
  std::array<Complex, 4> ev;
  for (int i = 0; i < 4; ++i) ev[i] = es.eigenvalues()(i);
  std::sort(ev.begin(), ev.end(), [](const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() > b.real();
    return a.imag() > b.imag();
  });
  res.eigenvalues = ev;

  const double gap2 = std::abs(ev[1]);
  const double gap3 = std::abs(ev[2]);
  res.classical_flag =
      std::abs(std::abs(gen.eta) - 1.0) < 1e-2 && gap2 <= 0.1 * gap3;

  const double inv = 1.0 / std::sqrt(2.0);
  res.psi1 = inv * (pair.psi_plus + pair.psi_minus);
  res.psi2 = inv * (pair.psi_plus - pair.psi_minus);
  res.gamma_loss = -gen.matrix(2, 2).real();

  double wp = gen.n_plus, wm = gen.n_minus;
  if (wp + wm == 0.0) {
    wp = gen.X_plus;
    wm = gen.X_minus;
  }
  const int dim = static_cast<int>(pair.psi_plus.size());
  if (wp + wm > 0.0) {
    const double geo = std::sqrt(wp * wm);
    const double norm = std::sqrt(wp + wm) * (std::sqrt(wp) + std::sqrt(wm));
    res.jump = ((wp + geo) * (pair.psi_plus * pair.psi_minus.adjoint()) +
                (wm + geo) * (pair.psi_minus * pair.psi_plus.adjoint())) /
               norm;
  } else {
    res.jump = Operator::Zero(dim, dim);
  }
  return res;
}

MetaSteadyState combined_steady(const StationaryPair& pair, double n_plus,
                                double n_minus, double X_plus, double X_minus,
                                double kappa, double nu) {
  const double denom = kappa * (n_minus + n_plus) + nu * (X_minus + X_plus);
  if (denom == 0.0) throw DegenerateError("no relaxation channel: weights undefined");
  MetaSteadyState st;
  st.p_plus = (kappa * n_minus + nu * X_minus) / denom;
  st.assembled = st.p_plus * (pair.psi_plus * pair.psi_plus.adjoint()) +
                 (1.0 - st.p_plus) * (pair.psi_minus * pair.psi_minus.adjoint());
  return st;
}

namespace {

Eigen::VectorXd component_stationary(const Eigen::MatrixXd& rates,
                                     const std::vector<int>& members) {
  const int n = static_cast<int>(members.size());
  if (n == 1) return Eigen::VectorXd::Ones(1);
  Eigen::MatrixXd sub(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) sub(i, j) = rates(members[i], members[j]);
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeFullV);
  Eigen::VectorXd pi = svd.matrixV().col(n - 1).cwiseAbs();
  const double total = pi.sum();
  if (total <= 0.0) throw NumericalError("degenerate ladder kernel");
  pi /= total;
  if ((sub * pi).norm() > 1e-8 * std::max(1.0, sub.norm()))
    throw NumericalError("ladder stationary distribution did not converge");
  return pi;
}

}  // namespace

LadderRates hardwall_ladder(const AtomState& atom, double phi,
                            const WallSequence& walls, const LadderNoise& noise,
                            const std::vector<LadderState>& states) {
  if (!walls.walls.empty() &&
      std::abs(phi - walls.walls.front().phi) > 1e-9 * std::max(1.0, std::abs(phi)))
    throw DegenerateError("integrated coupling does not match the wall sequence");
  const int n = static_cast<int>(states.size());
  LadderRates out;
  out.rates = Eigen::MatrixXd::Zero(n, n);
  out.stationary = Eigen::VectorXd::Zero(n);
  if (n == 0) return out;

  std::vector<long> wall_positions;
  for (const auto& w : walls.walls) wall_positions.push_back(w.m);
  auto known_wall = [&](long m) {
    return std::find(wall_positions.begin(), wall_positions.end(), m) !=
           wall_positions.end();
  };
  for (const auto& st : states) {
    if (st.parity != 1 && st.parity != -1) throw DegenerateError("parity must be +-1");
    if (!wall_positions.empty()) {
      if (st.lower >= 0 && !known_wall(st.lower))
        throw DegenerateError("state lower bound is not a wall");
      if (st.upper >= 0 && !known_wall(st.upper))
        throw DegenerateError("state upper bound is not a wall");
    }
  }

  const int dim = static_cast<int>(states.front().rho.rows());
  // labels: rank within the parity sector ordered by lower bound
  for (int i = 0; i < n; ++i) {
    int k = 0;
    for (int j = 0; j < n; ++j)
      if (j != i && states[j].parity == states[i].parity &&
          states[j].lower < states[i].lower)
        ++k;
    out.labels.emplace_back(k, states[i].parity);
  }

  std::vector<Eigen::VectorXd> support(n);
  for (int i = 0; i < n; ++i) {
    support[i] = Eigen::VectorXd::Zero(dim);
    for (int m = 0; m < dim; ++m)
      if (states[i].rho(m, m).real() > 1e-12) support[i](m) = 1.0;
  }

  const bool swap_enabled =
      noise.kappa > 0.0 || (noise.nu > 0.0 && !noise.phase_ops.empty());
  if (swap_enabled) {
    const Operator a = annihilation_op(dim);
    for (int i = 0; i < n; ++i) {
      Operator pushed = Operator::Zero(dim, dim);
      if (noise.kappa > 0.0)
        pushed += noise.kappa * (a * states[i].rho * a.adjoint());
      if (noise.nu > 0.0)
        for (const Operator& m : noise.phase_ops)
          pushed += noise.nu * (m * states[i].rho * m.adjoint());
      for (int j = 0; j < n; ++j) {
        if (states[j].parity == states[i].parity) continue;
        double captured = 0.0;
        for (int m = 0; m < dim; ++m)
          if (support[j](m) > 0.0) captured += pushed(m, m).real();
        if (captured > 0.0) out.rates(j, i) += captured;
      }
    }
  }

  const bool same_enabled = noise.Gamma1_tau > 0.0 || noise.Gamma3_tau > 0.0 ||
                            noise.beam_variance > 0.0;
  if (same_enabled) {
    const double up_base = noise.nu * std::norm(atom.c_e);
    const double down_base = noise.nu * std::norm(atom.c_g);
    auto sin2bar = [&](long m) {
      return noise.beam_variance * (m + 1.0) * (m + 2.0);
    };
    for (int i = 0; i < n; ++i) {
      const long mu = states[i].upper;
      if (mu >= 0 && mu < dim) {
        for (int j = 0; j < n; ++j) {
          if (j == i || states[j].parity != states[i].parity) continue;
          if (states[j].lower != mu) continue;
          const double dens = states[i].rho(mu, mu).real();
          out.rates(j, i) +=
              up_base * (0.5 * noise.Gamma1_tau + sin2bar(mu)) * dens;
        }
      }
      const long ml = states[i].lower;
      if (ml >= 0 && ml + 2 < dim) {
        for (int j = 0; j < n; ++j) {
          if (j == i || states[j].parity != states[i].parity) continue;
          if (states[j].upper != ml) continue;
          const double dens = states[i].rho(ml + 2, ml + 2).real();
          out.rates(j, i) +=
              down_base *
              ((4.0 * noise.Gamma3_tau - 3.0 * noise.gamma13_tau) / 8.0 +
               sin2bar(ml)) *
              dens;
        }
      }
    }
  }

  for (int i = 0; i < n; ++i) {
    double col = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) col += out.rates(j, i);
    out.rates(i, i) = -col;
  }

  if (std::abs(std::abs(atom.c_e) - 1.0) < 1e-9) {
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        if (j == i || out.rates(j, i) <= 1e-14) continue;
        if (photon_mean(states[j].rho) <= photon_mean(states[i].rho) + 1e-9)
          throw NumericalError("excited pumping produced a downward transition");
      }
  }

  // stationary distribution per connected component, components weighted equally
  std::vector<int> comp(n, -1);
  int n_comp = 0;
  for (int i = 0; i < n; ++i) {
    if (comp[i] >= 0) continue;
    std::vector<int> stack{i};
    comp[i] = n_comp;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      for (int v = 0; v < n; ++v)
        if (comp[v] < 0 && (out.rates(u, v) > 0.0 || out.rates(v, u) > 0.0)) {
          comp[v] = n_comp;
          stack.push_back(v);
        }
    }
    ++n_comp;
  }
  for (int c = 0; c < n_comp; ++c) {
    std::vector<int> members;
    for (int i = 0; i < n; ++i)
      if (comp[i] == c) members.push_back(i);
    const Eigen::VectorXd pi = component_stationary(out.rates, members);
    for (std::size_t idx = 0; idx < members.size(); ++idx)
      out.stationary(members[idx]) = pi(static_cast<int>(idx)) / n_comp;
  }

  out.detailed_balance = true;
  const double scale = std::max(out.rates.cwiseAbs().maxCoeff(), 1e-300);
  for (int i = 0; i < n && out.detailed_balance; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double flow_ij = out.stationary(i) * out.rates(j, i);
      const double flow_ji = out.stationary(j) * out.rates(i, j);
      if (std::abs(flow_ij - flow_ji) > 1e-8 * scale) {
        out.detailed_balance = false;
        break;
      }
    }
  return out;
}

}  // namespace maser
