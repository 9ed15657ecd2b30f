#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <maser/channels.hpp>
#include <maser/errors.hpp>
#include <maser/fock.hpp>
#include <maser/linalg.hpp>
#include <maser/steady.hpp>
#include <maser/walls.hpp>

#include "test_support.hpp"

using namespace maser;
using maser::test::apply_map;
using maser::test::random_density;

namespace {

AtomState atom_for(double c_e) { return {std::sqrt(1.0 - c_e * c_e), c_e}; }

double completeness_residual(const KrausSet& kraus) {
  int dim = static_cast<int>(kraus.ops.front().rows());
  Operator sum = Operator::Zero(dim, dim);
  for (const Operator& m : kraus.ops) sum += m.adjoint() * m;
  return (sum - identity_op(dim)).cwiseAbs().maxCoeff();
}

Superoperator parity_conjugation(int dim) {
  Operator p = parity_op(dim);
  return sandwich(p, p);
}

}  // namespace

TEST_CASE("two-photon Kraus pair: completeness and matrix elements") {
  int dim = 21;
  AtomState atom = atom_for(0.65);
  KrausSet kraus = kraus_two_photon(atom, 0.83, dim);
  REQUIRE(kraus.ops.size() == 2);
  CHECK(completeness_residual(kraus) < 1e-12);

  double phi = 0.83;
  Ket out = kraus.ops[0] * fock_state(dim, 0);
  CHECK(std::abs(out(0) - atom.c_g) < 1e-14);
  CHECK(std::abs(out(2) - (-I * atom.c_e * std::sin(std::sqrt(2.0) * phi))) < 1e-14);
  for (int n = 0; n < dim; ++n)
    if (n != 0 && n != 2) CHECK(std::abs(out(n)) == 0.0);
}

TEST_CASE("two-photon Kraus operators commute with parity exactly") {
  int dim = 14;
  KrausSet kraus = kraus_two_photon(atom_for(0.4), 1.3, dim);
  Operator p = parity_op(dim);
  for (const Operator& m : kraus.ops)
    CHECK((m * p - p * m).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("hard wall makes the channel block diagonal") {
  int dim = 30;
  double phi = phi_for_wall(20, 5);
  KrausSet kraus = kraus_two_photon(atom_for(0.65), phi, dim);
  CHECK(std::abs(kraus.ops[0](22, 20)) < 1e-10);
  CHECK(std::abs(kraus.ops[1](20, 22)) < 1e-10);
}

TEST_CASE("shifted Kraus operators") {
  int dim = 24;
  AtomState atom = atom_for(0.2);
  double phi = 1.0;
  KrausSet kraus = kraus_two_photon(atom, phi, dim);
  KrausSet shifted = shifted_kraus(kraus, atom);

  SUBCASE("phi = 0 gives zero matrices") {
    KrausSet at_zero = shifted_kraus(kraus_two_photon(atom, 0.0, dim), atom);
    for (const Operator& m : at_zero.ops) CHECK(m.cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("dark on the stationary pair") {
    StationaryPair pair = pure_stationary(atom, phi, dim);
    for (const Operator& m : shifted.ops) {
      CHECK((m * pair.psi_plus).norm() < 1e-8);
      CHECK((m * pair.psi_minus).norm() < 1e-8);
    }
  }
}

TEST_CASE("generator assembled from shifted Kraus equals nu(M0 - I)") {
  int dim = 16;
  double nu = 1.7;
  AtomState atom{0.8 * std::exp(I * 0.2), 0.6 * std::exp(-I * 0.7)};
  KrausSet kraus = kraus_two_photon(atom, 0.9, dim);
  KrausSet shifted = shifted_kraus(kraus, atom);

  // M0(rho) - rho = sum_j Mt_j rho Mt_j† + A rho + rho A†,
  // A = c_g* Mt_g - c_e* Mt_e, straight from expanding the shifts.
  Operator a_op = std::conj(atom.c_g) * shifted.ops[0] -
                  std::conj(atom.c_e) * shifted.ops[1];
  Superoperator lhs = Superoperator::Zero(dim * dim, dim * dim);
  for (const Operator& m : shifted.ops) lhs += sandwich(m, m.adjoint());
  lhs += sandwich(a_op, identity_op(dim));
  lhs += sandwich(identity_op(dim), a_op.adjoint());
  lhs *= nu;

  Superoperator rhs = generator_L0(kraus, nu);
  CHECK(maser::test::superop_distance(lhs, rhs) < 1e-10);

  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 5; ++trial) {
    DensityMatrix rho = random_density(dim, rng);
    CHECK((apply_map(lhs, rho) - apply_map(rhs, rho)).norm() < 1e-10);
  }
}

TEST_CASE("discrete map basics") {
  int dim = 12;
  KrausSet identity_set{{identity_op(dim)}, {"I"}};
  CHECK(maser::test::superop_distance(discrete_map(identity_set),
                                      Superoperator::Identity(dim * dim, dim * dim)) == 0.0);

  KrausSet kraus = kraus_two_photon(atom_for(0.5), 0.7, dim);
  Superoperator map = discrete_map(kraus);
  Operator par = parity_op(dim);
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    DensityMatrix rho = random_density(dim, rng);
    DensityMatrix out = apply_map(map, rho);
    CHECK(std::abs(out.trace() - Complex(1.0)) < 1e-12);
    CHECK(std::abs((par * out).trace() - (par * rho).trace()) < 1e-12);
  }
}

TEST_CASE("generator_L0 fundamentals") {
  int dim = 18;
  AtomState atom = atom_for(0.3);
  KrausSet kraus = kraus_two_photon(atom, 0.6, dim);

  CHECK(generator_L0(kraus, 0.0).cwiseAbs().maxCoeff() == 0.0);

  Superoperator gen = generator_L0(kraus, 2.0);
  Ket id = vec(identity_op(dim));
  CHECK((id.adjoint() * gen).norm() < 1e-10);

  StationaryPair pair = pure_stationary(atom, 0.6, dim);
  DensityMatrix coh = pair.psi_plus * pair.psi_minus.adjoint();
  CHECK(apply_map(gen, coh).norm() < 1e-8);

  CHECK(maser::test::superop_distance(
            gen, generator_from_map(discrete_map(kraus), 2.0)) < 1e-14);
}

TEST_CASE("lindblad_generator assembles commutator and dissipators") {
  int dim = 8;
  Operator h = number_op(dim);
  Operator a = annihilation_op(dim);
  Superoperator gen = lindblad_generator(h, {{0.4, a}, {0.1, a * a}});
  Superoperator expect =
      commutator_superop(h) + 0.4 * dissipator(a) + 0.1 * dissipator(a * a);
  CHECK(maser::test::superop_distance(gen, expect) < 1e-14);
}

TEST_CASE("loss dissipator") {
  int dim = 6;
  double kappa = 0.37;

  SUBCASE("vacuum is stationary at zero temperature") {
    Superoperator loss = loss_dissipator(kappa, 0.0, dim);
    CHECK(apply_map(loss, projector(fock_state(dim, 0))).norm() < 1e-14);
  }

  SUBCASE("spectrum is the analytic multiset") {
    Superoperator loss = loss_dissipator(kappa, 0.0, dim);
    Eigen::ComplexEigenSolver<Superoperator> solver(loss);
    std::vector<double> numeric, analytic;
    for (int i = 0; i < loss.rows(); ++i) {
      CHECK(std::abs(solver.eigenvalues()(i).imag()) < 1e-8);
      numeric.push_back(solver.eigenvalues()(i).real());
    }
    for (int n = 0; n < dim; ++n)
      for (int m = 0; m < dim; ++m) analytic.push_back(-kappa * (n + m) / 2.0);
    std::sort(numeric.begin(), numeric.end());
    std::sort(analytic.begin(), analytic.end());
    for (std::size_t i = 0; i < numeric.size(); ++i)
      CHECK(std::abs(numeric[i] - analytic[i]) < 1e-8);
  }

  SUBCASE("thermal occupation gives a geometric stationary diagonal") {
    double n_th = 0.5;
    Superoperator loss = loss_dissipator(kappa, n_th, 12);
    double ratio = n_th / (1.0 + n_th);
    DensityMatrix rho = DensityMatrix::Zero(12, 12);
    double w = 1.0;
    for (int n = 0; n < 12; ++n, w *= ratio) rho(n, n) = w;
    rho /= rho.trace().real();
    CHECK(apply_map(loss, rho).norm() < 1e-12);
  }
}

TEST_CASE("weak parity symmetry of the lossy generator") {
  int dim = 16;
  Superoperator gen = generator_L0(kraus_two_photon(atom_for(0.1), 0.1, dim), 1.0) +
                      loss_dissipator(1e-3, 0.0, dim);
  Superoperator conj = parity_conjugation(dim);
  CHECK(maser::test::superop_distance(conj * gen * conj, gen) < 1e-10);
}

TEST_CASE("mixed-atom Kraus set") {
  int dim = 14;
  double phi = 0.8, phi2 = 0.21, phi3 = -0.34;

  SUBCASE("pure beam reduces to the two-photon channel") {
    MixedAtomSpec spec;
    spec.p_a = 1.0;
    spec.p_b = spec.p_0 = spec.p_2 = spec.p_4 = spec.p_aux = 0.0;
    spec.atom = atom_for(0.45);
    Superoperator mixed = discrete_map(kraus_mixed_atom(spec, phi, phi2, phi3, dim));
    Superoperator pure = discrete_map(kraus_two_photon(spec.atom, phi, dim));
    CHECK(maser::test::superop_distance(mixed, pure) < 1e-12);
  }

  SUBCASE("completeness and diagonal preservation at p_a = p_b") {
    MixedAtomSpec spec;
    spec.p_a = spec.p_b = 0.3;
    spec.p_0 = 0.1;
    spec.p_2 = 0.15;
    spec.p_4 = 0.05;
    spec.p_aux = 0.1;
    spec.atom = atom_for(0.45);
    KrausSet kraus = kraus_mixed_atom(spec, phi, phi2, phi3, dim);
    CHECK(completeness_residual(kraus) < 1e-10);

    DensityMatrix rho = DensityMatrix::Zero(dim, dim);
    rho(0, 0) = 0.2;
    rho(3, 3) = 0.5;
    rho(6, 6) = 0.3;
    DensityMatrix out = apply_map(discrete_map(kraus), rho);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        if (i != j) CHECK(std::abs(out(i, j)) < 1e-12);
  }
}

TEST_CASE("thermal-atom Kraus set") {
  int dim = 16;
  double phi = 0.9, phi2 = 0.4, phi3 = 0.1, nu = 1.3;
  ThermalAtomSpec spec;
  spec.p0 = 0.25;
  spec.p1 = 0.3;
  spec.p2 = 0.15;
  spec.p3 = 0.2;
  spec.p4 = 0.06;
  spec.pa = 0.04;
  KrausSet kraus = kraus_thermal_atom(spec, phi, phi2, phi3, dim);
  CHECK(completeness_residual(kraus) < 1e-10);

  SUBCASE("diagonal states stay diagonal") {
    DensityMatrix rho = DensityMatrix::Zero(dim, dim);
    rho(1, 1) = 0.4;
    rho(4, 4) = 0.6;
    DensityMatrix out = apply_map(discrete_map(kraus), rho);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j)
        if (i != j) CHECK(std::abs(out(i, j)) == 0.0);
  }

  SUBCASE("birth and death rates match the generator") {
    Superoperator gen = generator_from_map(discrete_map(kraus), nu);
    for (int n = 0; n + 2 < dim; ++n) {
      DensityMatrix pop = DensityMatrix::Zero(dim, dim);
      pop(n, n) = 1.0;
      DensityMatrix flow = apply_map(gen, pop);
      double birth = flow(n + 2, n + 2).real();
      CHECK(std::abs(birth - nu * spec.p3 * std::pow(sin_n(n, phi), 2)) < 1e-10);
      if (n >= 2) {
        double death = flow(n - 2, n - 2).real();
        CHECK(std::abs(death - nu * spec.p1 * std::pow(sin_n(n - 2, phi), 2)) < 1e-10);
      }
    }
  }
}

TEST_CASE("weak-coupling generator") {
  SUBCASE("c_e = 0 leaves pure two-photon loss") {
    int dim = 10;
    double phi = 0.2, nu = 1.4;
    Superoperator weak = weak_coupling_generator({1.0, 0.0}, phi, nu, dim);
    Operator a2 = annihilation_op(dim) * annihilation_op(dim);
    CHECK(maser::test::superop_distance(weak, nu * phi * phi * dissipator(a2)) < 1e-12);
  }

  SUBCASE("cat states are stationary in the weak-coupling limit") {
    int dim = 31;
    AtomState atom = atom_for(0.1);
    double phi = 0.1;
    Superoperator weak = weak_coupling_generator(atom, phi, 1.0, dim);
    Complex alpha = std::exp(-I * M_PI / 4.0) *
                    std::sqrt(2.0 * atom.c_e / (atom.c_g * phi));
    for (int parity : {+1, -1}) {
      DensityMatrix cat = projector(cat_state(dim, alpha, parity));
      CHECK(apply_map(weak, cat).norm() < 1e-6);
    }
  }

  SUBCASE("third-order convergence to the full generator") {
    int dim = 20, sub = 10;
    AtomState atom = atom_for(0.3);
    std::vector<long> keep;
    for (long i = 0; i < sub; ++i)
      for (long j = 0; j < sub; ++j) keep.push_back(i + dim * j);
    auto compressed_norm = [&](const Superoperator& s) {
      Superoperator block(keep.size(), keep.size());
      for (std::size_t r = 0; r < keep.size(); ++r)
        for (std::size_t c = 0; c < keep.size(); ++c)
          block(r, c) = s(keep[r], keep[c]);
      return block.norm();
    };
    auto defect = [&](double phi) {
      Superoperator full = generator_L0(kraus_two_photon(atom, phi, dim), 1.0);
      Superoperator weak = weak_coupling_generator(atom, phi, 1.0, dim);
      return compressed_norm(full - weak);
    };
    double d1 = defect(0.08), d2 = defect(0.04);
    CHECK(d1 / d2 == doctest::Approx(8.0).epsilon(0.05));
    CHECK(d1 / d2 >= 7.6);
  }
}

TEST_CASE("beam-averaged map") {
  int dim = 12;
  AtomState atom = atom_for(0.35);
  double phi = 0.6;

  SUBCASE("zero spread returns the monochromatic map") {
    Superoperator beam = beam_averaged_map(atom, phi, 0.0, 1.0, dim);
    Superoperator mono = discrete_map(kraus_two_photon(atom, phi, dim));
    CHECK(maser::test::superop_distance(beam, mono) < 1e-12);
  }

  SUBCASE("averaging preserves parity") {
    Superoperator beam = beam_averaged_map(atom, phi, 0.05 * phi, 1.0, dim);
    Superoperator conj = parity_conjugation(dim);
    CHECK(maser::test::superop_distance(conj * beam * conj, beam) < 1e-10);
  }

  SUBCASE("averaged weak-coupling coefficients") {
    int small = 8;
    double nu = 1.0, mean = 0.002, sigma = 0.0008;
    Superoperator beam = beam_averaged_map(atom, mean, sigma, nu, small);
    Superoperator gen = generator_from_map(beam, nu);

    Operator a2 = annihilation_op(small) * annihilation_op(small);
    Operator ad2 = a2.adjoint();
    Complex g = nu * std::conj(atom.c_g) * atom.c_e * mean;
    double kappa2 = nu * std::norm(atom.c_g) * (mean * mean + sigma * sigma);
    Operator h = std::conj(g) * a2 + g * ad2;
    Superoperator oracle = commutator_superop(h) + kappa2 * dissipator(a2);
    CHECK(maser::test::superop_distance(gen, oracle) < 1e-6);
  }
}

TEST_CASE("decay-modified map") {
  int dim = 12;
  AtomState atom = atom_for(0.4);
  double lambda = 0.5, tau = 1.2;

  SUBCASE("zero rates reproduce the noiseless channel") {
    DecayModifiedMap noisy = decay_modified_map(atom, lambda, tau, 0.0, 0.0, 0.7, dim);
    Superoperator clean = discrete_map(kraus_two_photon(atom, lambda * tau, dim));
    CHECK(maser::test::superop_distance(noisy.map, clean) < 1e-10);
    CHECK(noisy.rate_factor == doctest::Approx(1.0));
  }

  SUBCASE("uniform decay matches the integral form") {
    double gamma = 0.21;
    DecayModifiedMap noisy =
        decay_modified_map(atom, lambda, tau, gamma, gamma, 0.0, dim);
    auto map_at = [&](double t) {
      return Operator(discrete_map(kraus_two_photon(atom, lambda * t, dim)));
    };
    Operator integral = integrate_matrix(
        [&](double t) { return Operator(std::exp(-gamma * t) * map_at(t)); }, 0.0,
        tau, 1e-12);
    Superoperator expect = std::exp(-gamma * tau) * map_at(tau) + gamma * integral;
    CHECK(maser::test::superop_distance(noisy.map, expect) < 1e-8);
  }

  SUBCASE("assembled map preserves trace") {
    DecayModifiedMap noisy =
        decay_modified_map(atom, lambda, tau, 0.3, 0.15, 0.4, dim);
    Ket id = vec(identity_op(dim));
    CHECK(((id.adjoint() * noisy.map).adjoint() - id).norm() < 1e-8);
  }
}

TEST_CASE("rotation to real dynamics") {
  int dim = 12;
  AtomState atom{0.8, 0.6 * std::exp(I * 1.1)};
  double theta = std::arg(atom.c_g / atom.c_e) / 2.0 - M_PI / 4.0;
  Operator u = Operator::Zero(dim, dim);
  for (int n = 0; n < dim; ++n) u(n, n) = std::exp(I * theta * double(n));
  KrausSet kraus = kraus_two_photon(atom, 0.7, dim);
  // Kraus operators in the rotated frame are real up to the global atom
  // phase; remove it by making c_g real.
  Complex global = std::conj(atom.c_g) / std::abs(atom.c_g);
  for (const Operator& m : kraus.ops) {
    Operator rotated = global * u * m * u.adjoint();
    CHECK(rotated.imag().cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("positivity is preserved over long evolution") {
  int dim = 12;
  AtomState atom = atom_for(0.3);
  Superoperator gen = generator_L0(kraus_two_photon(atom, 0.5, dim), 1.0) +
                      loss_dissipator(0.01, 0.0, dim);
  std::mt19937_64 rng(57);
  DensityMatrix rho = random_density(dim, rng);
  Superoperator prop = expm((100.0 * gen).eval());
  DensityMatrix out = apply_map(prop, rho);
  CHECK(std::abs(out.trace() - Complex(1.0)) < 1e-9);
  Eigen::SelfAdjointEigenSolver<DensityMatrix> es(0.5 * (out + out.adjoint()));
  CHECK(es.eigenvalues().minCoeff() > -1e-8);
}

TEST_CASE("boltzmann helper normalizes level populations") {
  double energies[6] = {0.0, 1.0, 2.0, 3.0, 4.0, 5.0};
  ThermalAtomSpec spec = ThermalAtomSpec::boltzmann(energies, 2.0);
  double total = spec.p0 + spec.p1 + spec.p2 + spec.p3 + spec.p4 + spec.pa;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(spec.p1 / spec.p0 == doctest::Approx(std::exp(-0.5)).epsilon(1e-12));
  CHECK(spec.p3 < spec.p1);
}
