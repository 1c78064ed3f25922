#include <doctest.h>

#include "tcme/lattice.hpp"
#include "test_support.hpp"

using namespace tcme;
using tcme::testing::max_abs;

TEST_CASE("grid geometry") {
  const Grid g = make_grid(64, 32.0);
  CHECK(g.dx() == doctest::Approx(0.5));
  CHECK(g.dq() == doctest::Approx(2.0 * std::numbers::pi / 32.0));
  CHECK(g.x(0) == -16.0);
  CHECK(g.p(g.zero_momentum_index()) == 0.0);
  CHECK(g.wrap_offset(33) == -31);
  CHECK(g.wrap_offset(-33) == 31);
  CHECK(g.wrap_offset(32) == -32);
  CHECK(g.wrapped_separation(63, 0) == doctest::Approx(-0.5));
  CHECK_THROWS_AS(make_grid(63, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(64, -1.0), std::invalid_argument);
}

TEST_CASE("density matrix validation") {
  const int n = 16;
  ComplexMatrix rho = testing::random_density(n, 1);
  CHECK_NOTHROW(DensityMatrix::from_matrix(rho));
  ComplexMatrix bad = rho;
  bad(0, 1) += 1e-6;
  CHECK_THROWS_AS(DensityMatrix::from_matrix(bad), std::invalid_argument);
  CHECK_THROWS_AS(DensityMatrix::from_matrix(2.0 * rho), std::invalid_argument);
  ComplexMatrix neg = ComplexMatrix::Zero(n, n);
  neg(0, 0) = 1.5;
  neg(1, 1) = -0.5;
  CHECK_THROWS_AS(DensityMatrix::from_matrix(neg), std::invalid_argument);
}

TEST_CASE("discrete Fourier conjugation matches the dense DFT") {
  for (int n : {8, 16, 64}) {
    const Grid g = make_grid(n, 7.3);
    const ComplexMatrix f = testing::dft_matrix(g);
    CHECK(max_abs(f * f.adjoint() - ComplexMatrix::Identity(n, n)) < 1e-13);
    const ComplexMatrix rho = testing::random_density(n, 7 + n);
    CHECK(max_abs(to_momentum(rho) - f * rho * f.adjoint()) < 1e-14);
    CHECK(max_abs(to_position(to_momentum(rho)) - rho) < 1e-14);
    CHECK(max_abs(momentum_operator(g) - testing::momentum_function(g, [](double p) { return p; })) <
          1e-12);
  }
}

TEST_CASE("position shift is conjugation by a cyclic permutation") {
  const int n = 16;
  const ComplexMatrix rho = testing::random_density(n, 3);
  for (int s : {1, 5, -3, 17}) {
    ComplexMatrix t = ComplexMatrix::Zero(n, n);
    for (int j = 0; j < n; ++j) t(((j + s) % n + n) % n, j) = 1.0;
    CHECK(max_abs(position_shift(rho, s) - t * rho * t.transpose()) == 0.0);
  }
  CHECK(max_abs(position_shift(rho, n) - rho) == 0.0);
}

TEST_CASE("momentum boost equals conjugation by exp(i q x)") {
  const Grid g = make_grid(32, 10.0);
  const ComplexMatrix rho = testing::random_density(32, 4);
  for (int m : {1, -2, 7, 40}) {
    const double q = m * g.dq();
    const ComplexMatrix u = testing::diag_position(g, q);
    CHECK(max_abs(momentum_boost(g, rho, q) - u * rho * u.adjoint()) < 1e-13);
    // shifts momentum populations by m cyclically
    const ComplexMatrix before = to_momentum(rho);
    const ComplexMatrix after = to_momentum(momentum_boost(g, rho, q));
    for (int a = 0; a < 32; ++a) {
      CHECK(std::abs(after(((a + m) % 32 + 32) % 32, ((a + m) % 32 + 32) % 32) - before(a, a)) <
            1e-13);
    }
  }
  CHECK_THROWS_AS(momentum_boost(g, rho, 0.5 * g.dq()), std::invalid_argument);
}

TEST_CASE("hermitian part and eigenvalues") {
  ComplexMatrix a(2, 2);
  a << Complex(1, 0.5), Complex(2, 1), Complex(0, 3), Complex(4, 0);
  const ComplexMatrix h = hermitian_part(a);
  CHECK(testing::bitwise_hermitian(h));
  CHECK(h(0, 0) == Complex(1, 0));
  CHECK(h(1, 0) == Complex(1, 1));
  CHECK(min_eigenvalue(ComplexMatrix::Identity(3, 3)) == doctest::Approx(1.0));
}
