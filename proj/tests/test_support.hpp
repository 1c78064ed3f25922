#pragma once

// Shared fixtures and brute-force oracles for the unit and acceptance tests.
// Everything here is built from explicit dense matrices, independently of the
// FFT-based library code.

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

#include "tcme/lattice.hpp"

namespace tcme::testing {

inline ComplexMatrix random_density(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix a(n, n);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j) a(j, k) = Complex(g(rng), g(rng));
  ComplexMatrix rho = a * a.adjoint();
  rho /= rho.trace().real();
  return hermitian_part(rho);
}

// Dense unitary DFT with rows labelled by momentum index and columns by
// position index: <p_a|x_j> = exp(-i p_a x_j) / sqrt(n).
inline ComplexMatrix dft_matrix(const Grid& grid) {
  const int n = grid.n_points();
  ComplexMatrix f(n, n);
  for (int a = 0; a < n; ++a)
    for (int j = 0; j < n; ++j)
      f(a, j) = std::polar(1.0 / std::sqrt(double(n)), -grid.p(a) * grid.x(j));
  return f;
}

// Position-representation operator g(p) via the dense DFT.
template <class F>
ComplexMatrix momentum_function(const Grid& grid, F&& g) {
  const ComplexMatrix f = dft_matrix(grid);
  ComplexMatrix d = ComplexMatrix::Zero(grid.n_points(), grid.n_points());
  for (int a = 0; a < grid.n_points(); ++a) d(a, a) = g(grid.p(a));
  return f.adjoint() * d * f;
}

inline ComplexMatrix diag_position(const Grid& grid, double q) {
  ComplexMatrix u = ComplexMatrix::Zero(grid.n_points(), grid.n_points());
  for (int j = 0; j < grid.n_points(); ++j) u(j, j) = std::polar(1.0, q * grid.x(j));
  return u;
}

inline ComplexMatrix dissipator(const ComplexMatrix& l, const ComplexMatrix& rho) {
  const ComplexMatrix ll = l.adjoint() * l;
  return l * rho * l.adjoint() - 0.5 * (ll * rho + rho * ll);
}

inline double max_abs(const ComplexMatrix& m) { return m.cwiseAbs().maxCoeff(); }

inline bool bitwise_hermitian(const ComplexMatrix& m) {
  for (Eigen::Index k = 0; k < m.cols(); ++k)
    for (Eigen::Index j = 0; j < m.rows(); ++j)
      if (m(j, k) != std::conj(m(k, j))) return false;
  return true;
}

}  // namespace tcme::testing
