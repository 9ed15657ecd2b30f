#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include <maser/errors.hpp>
#include <maser/fock.hpp>
#include <maser/linalg.hpp>

#include "test_support.hpp"

using namespace maser;
using maser::test::random_density;
using maser::test::random_ket;

TEST_CASE("kron matches hand-expanded 2x2 blocks") {
  Operator a(2, 2), b(2, 2);
  a << 1.0, 2.0, 3.0, 4.0;
  b << 0.0, Complex(0.0, 1.0), 1.0, 0.0;
  Operator k = kron(a, b);
  REQUIRE(k.rows() == 4);
  CHECK((k.block(0, 0, 2, 2) - a(0, 0) * b).norm() == doctest::Approx(0.0));
  CHECK((k.block(0, 2, 2, 2) - a(0, 1) * b).norm() == doctest::Approx(0.0));
  CHECK((k.block(2, 2, 2, 2) - a(1, 1) * b).norm() == doctest::Approx(0.0));
}

TEST_CASE("vec is column stacking and unvec inverts it") {
  Operator x(2, 3);
  x << 1.0, 2.0, 3.0, 4.0, 5.0, 6.0;
  Ket v = vec(x);
  CHECK(v(0) == Complex(1.0));
  CHECK(v(1) == Complex(4.0));
  CHECK(v(2) == Complex(2.0));
  CHECK((unvec(v, 2) - x).norm() == doctest::Approx(0.0));
}

TEST_CASE("sandwich represents rho -> A rho B") {
  std::mt19937_64 rng(11);
  Operator a = random_density(4, rng);
  Operator b = random_density(4, rng);
  DensityMatrix rho = random_density(4, rng);
  Ket lhs = sandwich(a, b) * vec(rho);
  CHECK((unvec(lhs, 4) - a * rho * b).norm() < 1e-13);
}

TEST_CASE("dissipator annihilates the identity functional") {
  Operator l = annihilation_op(6);
  Superoperator d = dissipator(l);
  Ket id = vec(identity_op(6));
  // Tr(D[a](rho)) = 0 for every rho means vec(I)† D = 0.
  CHECK((id.adjoint() * d).norm() < 1e-12);
}

TEST_CASE("dissipator on the vacuum projector") {
  int dim = 5;
  Superoperator d = dissipator(annihilation_op(dim));
  DensityMatrix one = projector(fock_state(dim, 1));
  DensityMatrix out = maser::test::apply_map(d, one);
  // D[a](|1><1|) = |0><0| - |1><1|.
  DensityMatrix expect = projector(fock_state(dim, 0)) - one;
  CHECK((out - expect).norm() < 1e-13);
}

TEST_CASE("commutator superoperator matches -i[H, rho]") {
  std::mt19937_64 rng(7);
  Operator h = random_density(5, rng);
  h = (h + h.adjoint()).eval();
  DensityMatrix rho = random_density(5, rng);
  DensityMatrix out = maser::test::apply_map(commutator_superop(h), rho);
  DensityMatrix expect = -I * (h * rho - rho * h);
  CHECK((out - expect).norm() < 1e-13);
}

TEST_CASE("expm of a Pauli rotation") {
  Operator sx(2, 2);
  sx << 0.0, 1.0, 1.0, 0.0;
  double theta = 0.7;
  Operator u = expm(-I * theta * sx);
  Operator expect(2, 2);
  expect << std::cos(theta), -I * std::sin(theta), -I * std::sin(theta),
      std::cos(theta);
  CHECK((u - expect).norm() < 1e-14);
}

TEST_CASE("expm of a nilpotent matrix terminates the series") {
  Operator n = Operator::Zero(3, 3);
  n(0, 1) = 2.0;
  n(1, 2) = 3.0;
  Operator e = expm(n);
  Operator expect = Operator::Identity(3, 3) + n + 0.5 * n * n;
  CHECK((e - expect).norm() < 1e-14);
}

TEST_CASE("expm handles large norms via scaling and squaring") {
  std::mt19937_64 rng(23);
  Operator h = random_density(6, rng);
  h = (50.0 * (h + h.adjoint())).eval();
  Operator u = expm(-I * h);
  CHECK((u * u.adjoint() - identity_op(6)).norm() < 1e-10);
}

TEST_CASE("expm_multiply agrees with dense expm") {
  std::mt19937_64 rng(3);
  int dim = 6;
  Superoperator gen = dissipator(annihilation_op(dim));
  Ket v = vec(random_density(dim, rng));
  double t = 2.5;
  Ket krylov = expm_multiply(gen, v, t);
  Ket dense = expm((t * gen).eval()) * v;
  CHECK((krylov - dense).norm() < 1e-8);
}

TEST_CASE("integrate_matrix reproduces polynomial and oscillatory integrals") {
  auto poly = [](double t) {
    Operator m(1, 1);
    m(0, 0) = 3.0 * t * t;
    return m;
  };
  Operator p = integrate_matrix(poly, 0.0, 2.0);
  CHECK(std::abs(p(0, 0) - Complex(8.0)) < 1e-10);

  auto osc = [](double t) {
    Operator m(1, 1);
    m(0, 0) = std::exp(I * 5.0 * t);
    return m;
  };
  Operator o = integrate_matrix(osc, 0.0, 1.0);
  Complex expect = (std::exp(I * 5.0) - 1.0) / (I * 5.0);
  CHECK(std::abs(o(0, 0) - expect) < 1e-9);
}

TEST_CASE("herm_eigen clips small negatives and rejects large ones") {
  Operator a(2, 2);
  a << 1.0, 0.0, 0.0, -1e-13;
  HermEigen e = herm_eigen(a);
  CHECK(e.values.minCoeff() == 0.0);

  a(1, 1) = -1.0;
  CHECK_THROWS_AS(herm_eigen(a), NumericalError);
}

TEST_CASE("herm_sqrt squares back") {
  std::mt19937_64 rng(5);
  DensityMatrix rho = random_density(6, rng);
  Operator s = herm_sqrt(rho);
  CHECK((s * s - rho).norm() < 1e-12);
  CHECK((s - s.adjoint()).norm() < 1e-12);
}

TEST_CASE("trace distance of orthogonal pure states is 1") {
  DensityMatrix a = projector(fock_state(4, 0));
  DensityMatrix b = projector(fock_state(4, 2));
  CHECK(trace_distance(a, b) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(trace_distance(a, a) == doctest::Approx(0.0).epsilon(1e-12));
  // Equal mixture against one of its branches: 1/2.
  DensityMatrix m = 0.5 * a + 0.5 * b;
  CHECK(trace_distance(a, m) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("vec identity ties sandwich to the Kronecker convention") {
  std::mt19937_64 rng(17);
  Operator a = random_density(3, rng);
  Operator b = random_density(3, rng);
  Operator x = random_density(3, rng);
  // vec(AXB) = (B^T kron A) vec(X).
  Ket lhs = vec((a * x * b).eval());
  Ket rhs = kron(b.transpose(), a) * vec(x);
  CHECK((lhs - rhs).norm() < 1e-13);
}
