#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <vector>

#include <maser/channels.hpp>
#include <maser/errors.hpp>
#include <maser/evolve.hpp>
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

// Greedy nearest matching between two eigenvalue multisets.
double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (const Complex& x : a) {
    double best = 1e300;
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      double d = std::abs(x - b[j]);
      if (d < best) {
        best = d;
        best_j = j;
      }
    }
    worst = std::max(worst, best);
    b.erase(b.begin() + best_j);
  }
  return worst;
}

}  // namespace

TEST_CASE("discrete evolution basics") {
  int dim = 14;
  AtomState atom = atom_for(0.35);
  Superoperator map = discrete_map(kraus_two_photon(atom, 0.8, dim));
  std::mt19937_64 rng(3);
  DensityMatrix rho = random_density(dim, rng);

  auto still = evolve_discrete(map, rho, 0);
  REQUIRE(still.size() == 1);
  CHECK((still[0].state - rho).norm() == 0.0);

  auto traj = evolve_discrete(map, rho, 200, 20);
  CHECK(traj.size() == 11);
  CHECK(traj.back().time == 200.0);
  Operator par = parity_op(dim);
  double parity0 = expval(rho, par);
  for (const TrajectoryPoint& pt : traj) {
    CHECK(std::abs(pt.state.trace() - Complex(1.0)) < 1e-10);
    CHECK((pt.state - pt.state.adjoint()).norm() < 1e-10);
    CHECK(std::abs(expval(pt.state, par) - parity0) < 1e-10);
  }
}

TEST_CASE("vacuum converges to the even stationary state at the known pace") {
  int dim = 25;
  AtomState atom = atom_for(0.65);
  double phi = phi_for_wall(20, 5);
  Superoperator map = discrete_map(kraus_two_photon(atom, phi, dim));
  StationaryPair pair = pure_stationary(atom, phi, dim);
  DensityMatrix target = projector(pair.psi_plus);

  auto traj = evolve_discrete(map, projector(fock_state(dim, 0)), 2000, 500);
  auto trace = fidelity_trace(traj, target);
  // Published convergence scale is ~10^3 atoms; factor-2 bracket.
  CHECK(trace[1].second < 0.99);   // k = 500
  CHECK(trace.back().second >= 0.99);  // k = 2000
}

TEST_CASE("continuous evolution of a damped coherent state") {
  int dim = 20;
  double kappa = 0.7;
  Complex alpha(1.1, -0.3);
  Superoperator gen = loss_dissipator(kappa, 0.0, dim);
  DensityMatrix rho0 = projector(coherent_state(dim, alpha));

  auto at_zero = evolve_continuous(gen, rho0, {0.0});
  CHECK((at_zero[0].state - rho0).norm() < 1e-12);

  for (double t : {0.4, 1.5}) {
    auto traj = evolve_continuous(gen, rho0, {t});
    DensityMatrix expect =
        projector(coherent_state(dim, alpha * std::exp(-kappa * t / 2.0)));
    CHECK((traj.back().state - expect).norm() < 1e-6);
  }
}

TEST_CASE("discrete and continuous spectra are affinely related") {
  int dim = 10;
  double nu = 1.7;
  KrausSet kraus = kraus_two_photon(atom_for(0.4), 0.6, dim);
  Superoperator map = discrete_map(kraus);
  Superoperator gen = generator_L0(kraus, nu);

  Eigen::ComplexEigenSolver<Superoperator> em(map), eg(gen);
  std::vector<Complex> from_map, from_gen;
  for (int i = 0; i < map.rows(); ++i) {
    from_map.push_back(nu * (em.eigenvalues()(i) - 1.0));
    from_gen.push_back(eg.eigenvalues()(i));
  }
  CHECK(multiset_distance(from_map, from_gen) < 1e-8);
}

TEST_CASE("spectrum report orders and flags") {
  int dim = 8;
  double kappa = 0.9;
  Superoperator gen = loss_dissipator(kappa, 0.0, dim);
  SpectrumReport report = spectrum(gen);
  REQUIRE(report.modes.size() == std::size_t(dim * dim));
  CHECK(std::abs(report.modes[0].eigenvalue) < 1e-9 * kappa);
  for (std::size_t i = 0; i + 1 < report.modes.size(); ++i)
    CHECK(report.modes[i].eigenvalue.real() >=
          report.modes[i + 1].eigenvalue.real() - 1e-12);

  std::vector<Complex> numeric, analytic;
  for (const SpectrumMode& mode : report.modes) {
    CHECK(mode.eigenvalue.real() <= 1e-9 * kappa);
    numeric.push_back(mode.eigenvalue);
  }
  for (int n = 0; n < dim; ++n)
    for (int m = 0; m < dim; ++m) analytic.push_back(-kappa * (n + m) / 2.0);
  CHECK(multiset_distance(numeric, analytic) < 1e-8);
}

TEST_CASE("thermal beam keeps a doubly degenerate zero mode") {
  int dim = 14;
  ThermalAtomSpec spec;
  spec.p0 = 0.3;
  spec.p1 = 0.35;
  spec.p2 = 0.1;
  spec.p3 = 0.15;
  spec.p4 = 0.06;
  spec.pa = 0.04;
  Superoperator gen = generator_from_map(
      discrete_map(kraus_thermal_atom(spec, 0.8, 0.3, 0.2, dim)), 1.0);
  SpectrumReport report = spectrum(gen, 6);
  int zero_modes = 0;
  for (const SpectrumMode& mode : report.modes)
    if (std::abs(mode.eigenvalue) < 1e-10) ++zero_modes;
  CHECK(zero_modes >= 2);
}

TEST_CASE("full model map: completeness, parity algebra, block sparsity") {
  int dim = 12;
  ModelParams params;
  params.g1 = Complex(0.04, 0.01);
  params.g2 = Complex(0.05, 0.0);
  params.g3 = Complex(0.045, -0.02);
  params.g4 = Complex(0.03, 0.0);
  params.G = Complex(0.08, 0.03);
  params.Delta1 = 1.1;
  params.Delta2 = 1.4;
  params.Delta3 = -1.4;
  params.Delta4 = -0.9;
  params.delta = 2.2;
  params.tau = 7.0;
  AtomState atom = atom_for(0.5);
  KrausSet kraus = full_model_map(params, atom, dim);
  REQUIRE(kraus.ops.size() == 6);

  Operator sum = Operator::Zero(dim, dim);
  for (const Operator& m : kraus.ops) sum += m.adjoint() * m;
  CHECK((sum - identity_op(dim)).cwiseAbs().maxCoeff() < 1e-10);

  Operator par = parity_op(dim);
  for (int j = 0; j <= 4; ++j) {
    double sign = (j % 2 == 0) ? -1.0 : 1.0;  // (-1)^(j+1)
    CHECK((kraus.ops[j] * par - sign * par * kraus.ops[j]).cwiseAbs().maxCoeff() <
          1e-12);
  }

  // Conserved excitation number: atom enters with 1 or 3 quanta, so M_j
  // only connects n -> n + 1 - j and n -> n + 3 - j.
  for (int j = 0; j <= 4; ++j)
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c)
        if (r - c != 1 - j && r - c != 3 - j)
          CHECK(std::abs(kraus.ops[j](r, c)) == 0.0);
}

TEST_CASE("two-photon stationary state is a fixed point of both pictures") {
  int dim = 26;
  AtomState atom = atom_for(0.2);
  double phi = 0.9;
  KrausSet kraus = kraus_two_photon(atom, phi, dim);
  StationaryPair pair = pure_stationary(atom, phi, dim);
  DensityMatrix rho = projector(pair.psi_plus);

  Superoperator map = discrete_map(kraus);
  CHECK((apply_map(map, rho) - rho).norm() < 1e-10);

  Superoperator gen = generator_L0(kraus, 1.3);
  auto traj = evolve_continuous(gen, rho, {5.0});
  CHECK((traj.back().state - rho).norm() < 1e-9);
}

TEST_CASE("fidelity trace endpoints and spectral convergence bound") {
  int dim = 12;
  double kappa = 0.8;
  Superoperator gen = loss_dissipator(kappa, 0.0, dim);
  DensityMatrix rho0 = projector(coherent_state(dim, Complex(0.9, 0.0)));

  std::vector<double> times;
  for (int i = 0; i <= 30; ++i) times.push_back(i * (20.0 / kappa) / 30.0);
  auto traj = evolve_continuous(gen, rho0, times);

  auto self_trace = fidelity_trace(traj, traj.back().state);
  CHECK(self_trace.back().second == doctest::Approx(1.0).epsilon(1e-9));

  DensityMatrix target = projector(fock_state(dim, 0));
  auto trace = fidelity_trace(traj, target);
  for (std::size_t i = 0; i + 1 < trace.size(); ++i)
    CHECK(trace[i + 1].second >= trace[i].second - 1e-9);
  // |Re lambda_2| = kappa/2, so t = 10/|Re lambda_2| = 20/kappa.
  CHECK(trace.back().second >= 1.0 - 1e-3);
}

TEST_CASE("plateau detector on synthetic traces") {
  // Two flat shelves separated by a drop, on a log-time grid.
  std::vector<std::pair<double, double>> trace;
  for (int i = 0; i <= 400; ++i) {
    double logt = -2.0 + 8.0 * i / 400.0;
    double t = std::pow(10.0, logt);
    double f;
    if (logt < 0.0) f = 0.30;
    else if (logt < 1.5) f = 0.30 + 0.35 * (logt / 1.5);
    else if (logt < 3.5) f = 0.65;
    else if (logt < 4.5) f = 0.65 + 0.30 * ((logt - 3.5) / 1.0);
    else f = 0.95;
    trace.emplace_back(t, f);
  }
  auto plateaus = find_plateaus(trace, 0.01, 1.0);
  REQUIRE(plateaus.size() == 3);
  CHECK(plateaus[0].second <= 2.0);
  CHECK(plateaus[1].first >= std::pow(10.0, 1.4));
  CHECK(plateaus[1].second <= std::pow(10.0, 3.6));

  std::vector<std::pair<double, double>> ramp;
  for (int i = 0; i <= 100; ++i) {
    double t = std::pow(10.0, -2.0 + 6.0 * i / 100.0);
    ramp.emplace_back(t, 0.1 + 0.1 * std::log10(t));
  }
  CHECK(find_plateaus(ramp, 0.01, 1.0).empty());
}

TEST_CASE("trajectory CSV layout") {
  int dim = 8;
  Superoperator map = discrete_map(kraus_two_photon(atom_for(0.3), 0.5, dim));
  auto traj = evolve_discrete(map, projector(fock_state(dim, 0)), 10, 5);
  std::string path = "test_evolve_traj.csv";
  write_trajectory_csv(traj, projector(fock_state(dim, 0)), path, "k",
                       "# sample preamble\n");

  std::ifstream in(path);
  REQUIRE(in.good());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# sample preamble");
  std::getline(in, line);
  CHECK(line == "k,trace,purity,mean_n,parity,fidelity");
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++rows;
  CHECK(rows == 3);
  in.close();
  std::remove(path.c_str());
}
