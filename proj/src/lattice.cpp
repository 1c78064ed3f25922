#include "tcme/lattice.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <fmt/format.h>

#include "tcme/spectral.hpp"

namespace tcme {

Grid::Grid(int n_points, double length) : n_(n_points), length_(length) {
  if (n_points < 8 || n_points % 2 != 0) {
    throw std::invalid_argument(
        fmt::format("grid n_points must be even and >= 8, got {}", n_points));
  }
  if (!(length > 0.0) || !std::isfinite(length)) {
    throw std::invalid_argument(fmt::format("grid length must be positive, got {}", length));
  }
}

double Grid::dq() const { return 2.0 * std::numbers::pi / length_; }

std::vector<double> Grid::x_values() const {
  std::vector<double> out(n_);
  for (int j = 0; j < n_; ++j) out[j] = x(j);
  return out;
}

std::vector<double> Grid::p_values() const {
  std::vector<double> out(n_);
  for (int a = 0; a < n_; ++a) out[a] = p(a);
  return out;
}

int Grid::wrap_offset(long offset) const {
  long r = offset % n_;
  if (r < 0) r += n_;
  if (r >= n_ / 2) r -= n_;
  return static_cast<int>(r);
}

Grid make_grid(int n_points, double length) { return Grid(n_points, length); }

DensityMatrix DensityMatrix::from_matrix(ComplexMatrix entries, Representation rep) {
  if (entries.rows() != entries.cols() || entries.rows() == 0) {
    throw std::invalid_argument("density matrix must be square and non-empty");
  }
  if (!entries.allFinite()) throw std::invalid_argument("density matrix has non-finite entries");
  const double herm = hermiticity_residual(entries);
  if (herm > 1e-12) {
    throw std::invalid_argument(fmt::format("density matrix not Hermitian (residual {:.3e})", herm));
  }
  const Complex tr = entries.trace();
  if (std::abs(tr - 1.0) > 1e-10) {
    throw std::invalid_argument(
        fmt::format("density matrix trace {:.15g}{:+.3e}i is not 1", tr.real(), tr.imag()));
  }
  const double lowest = min_eigenvalue(entries);
  if (lowest < -1e-10) {
    throw std::invalid_argument(
        fmt::format("density matrix has negative eigenvalue {:.3e}", lowest));
  }
  return DensityMatrix(std::move(entries), rep);
}

DensityMatrix DensityMatrix::trusted(ComplexMatrix entries, Representation rep) {
  return DensityMatrix(std::move(entries), rep);
}

double hermiticity_residual(const ComplexMatrix& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

ComplexMatrix hermitian_part(const ComplexMatrix& a) {
  const Eigen::Index n = a.rows();
  ComplexMatrix out(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out(k, k) = Complex(a(k, k).real(), 0.0);
    for (Eigen::Index j = k + 1; j < n; ++j) {
      const Complex v = 0.5 * (a(j, k) + std::conj(a(k, j)));
      out(j, k) = v;
      out(k, j) = std::conj(v);
    }
  }
  return out;
}

double min_eigenvalue(const ComplexMatrix& a) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(hermitian_part(a),
                                                       Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

ComplexMatrix position_shift(const ComplexMatrix& rho, int steps) {
  const int n = static_cast<int>(rho.rows());
  int s = steps % n;
  if (s < 0) s += n;
  ComplexMatrix out(n, n);
  for (int k = 0; k < n; ++k) {
    const int kk = (k + s) % n;
    for (int j = 0; j < n; ++j) out((j + s) % n, kk) = rho(j, k);
  }
  return out;
}

DensityMatrix position_shift(const DensityMatrix& rho, int steps) {
  if (rho.representation() != Representation::Position) {
    throw std::invalid_argument("position_shift expects a position-representation state");
  }
  return DensityMatrix::trusted(position_shift(rho.matrix(), steps));
}

namespace {

int boost_steps(const Grid& grid, double q) {
  const double ratio = q / grid.dq();
  const double nearest = std::round(ratio);
  if (std::abs(ratio - nearest) > 1e-9 * std::max(1.0, std::abs(ratio))) {
    throw std::invalid_argument(
        fmt::format("momentum boost {} is not a multiple of dq = {}", q, grid.dq()));
  }
  return static_cast<int>(nearest);
}

}  // namespace

ComplexMatrix momentum_boost_steps(const Grid& grid, const ComplexMatrix& rho, int steps) {
  const int n = grid.n_points();
  if (rho.rows() != n) throw std::invalid_argument("momentum_boost: grid/state size mismatch");
  // exp(i q x_j) with q = steps dq reduces to an n-th root of unity times a
  // global phase, which cancels between ket and bra.
  std::vector<Complex> phase(n);
  const double base = 2.0 * std::numbers::pi / n;
  for (int j = 0; j < n; ++j) {
    const long m = (static_cast<long>(steps) * j) % n;
    phase[j] = std::polar(1.0, base * static_cast<double>(m));
  }
  ComplexMatrix out(n, n);
  for (int k = 0; k < n; ++k) {
    const Complex right = std::conj(phase[k]);
    for (int j = 0; j < n; ++j) out(j, k) = phase[j] * rho(j, k) * right;
  }
  return out;
}

ComplexMatrix momentum_boost(const Grid& grid, const ComplexMatrix& rho, double q) {
  return momentum_boost_steps(grid, rho, boost_steps(grid, q));
}

DensityMatrix momentum_boost(const Grid& grid, const DensityMatrix& rho, double q) {
  if (rho.representation() != Representation::Position) {
    throw std::invalid_argument("momentum_boost expects a position-representation state");
  }
  return DensityMatrix::trusted(momentum_boost(grid, rho.matrix(), q));
}

ComplexMatrix to_momentum(const ComplexMatrix& rho) {
  const int n = static_cast<int>(rho.rows());
  ComplexMatrix out = rho;
  spectral::transform_axis(out.data(), spectral::matrix_row_axis(n), spectral::Slot::Ket,
                           spectral::Direction::ToMomentum);
  spectral::transform_axis(out.data(), spectral::matrix_column_axis(n), spectral::Slot::Bra,
                           spectral::Direction::ToMomentum);
  return out;
}

ComplexMatrix to_position(const ComplexMatrix& rho_p) {
  const int n = static_cast<int>(rho_p.rows());
  ComplexMatrix out = rho_p;
  spectral::transform_axis(out.data(), spectral::matrix_row_axis(n), spectral::Slot::Ket,
                           spectral::Direction::ToPosition);
  spectral::transform_axis(out.data(), spectral::matrix_column_axis(n), spectral::Slot::Bra,
                           spectral::Direction::ToPosition);
  return out;
}

DensityMatrix to_momentum_representation(const DensityMatrix& rho) {
  if (rho.representation() != Representation::Position) {
    throw std::invalid_argument("state is already in momentum representation");
  }
  return DensityMatrix::trusted(to_momentum(rho.matrix()), Representation::Momentum);
}

DensityMatrix to_position_representation(const DensityMatrix& rho) {
  if (rho.representation() != Representation::Momentum) {
    throw std::invalid_argument("state is already in position representation");
  }
  return DensityMatrix::trusted(to_position(rho.matrix()), Representation::Position);
}

ComplexMatrix momentum_operator(const Grid& grid) {
  const int n = grid.n_points();
  ComplexMatrix diag = ComplexMatrix::Zero(n, n);
  for (int a = 0; a < n; ++a) diag(a, a) = grid.p(a);
  return to_position(diag);
}

ComplexMatrix position_operator(const Grid& grid) {
  const int n = grid.n_points();
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (int j = 0; j < n; ++j) out(j, j) = grid.x(j);
  return out;
}

}  // namespace tcme
