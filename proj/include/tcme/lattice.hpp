#pragma once

// Periodic 1-D position lattice, its conjugate momentum lattice, and the
// exact lattice unitaries (translations, momentum boosts, discrete Fourier
// conjugation) used by every other module. Internal units: hbar = 1.

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

namespace tcme {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;

class Grid {
 public:
  /// Throws std::invalid_argument unless n_points is even and >= 8 and
  /// length > 0.
  Grid(int n_points, double length);

  int n_points() const { return n_; }
  double length() const { return length_; }
  double dx() const { return length_ / n_; }
  double dq() const;

  /// x_j = -length/2 + j dx
  double x(int j) const { return -0.5 * length_ + j * dx(); }
  /// p_a = (a - n/2) dq, so index n/2 is zero momentum.
  double p(int a) const { return (a - n_ / 2) * dq(); }
  double p_max() const { return 0.5 * n_ * dq(); }

  std::vector<double> x_values() const;
  std::vector<double> p_values() const;

  /// Index difference reduced to [-n/2, n/2).
  int wrap_offset(long offset) const;
  /// Minimum-image separation x_j - x_k on the periodic lattice.
  double wrapped_separation(int j, int k) const { return wrap_offset(j - k) * dx(); }

  /// Zero-momentum index.
  int zero_momentum_index() const { return n_ / 2; }

  bool operator==(const Grid& other) const = default;

 private:
  int n_;
  double length_;
};

Grid make_grid(int n_points, double length);

enum class Representation { Position, Momentum };

/// Hermitian, unit-trace, positive semidefinite matrix tagged with the basis
/// it is written in.
class DensityMatrix {
 public:
  /// Validates Hermiticity (1e-12), unit trace (1e-10) and eigenvalues
  /// (>= -1e-10); throws std::invalid_argument on violation.
  static DensityMatrix from_matrix(ComplexMatrix entries,
                                   Representation rep = Representation::Position);
  /// Skips validation. Only for outputs of maps already known to preserve the
  /// invariants (unitary conjugation, integrator output under diagnostics).
  static DensityMatrix trusted(ComplexMatrix entries,
                               Representation rep = Representation::Position);

  const ComplexMatrix& matrix() const { return entries_; }
  Representation representation() const { return rep_; }
  int size() const { return static_cast<int>(entries_.rows()); }
  Complex operator()(int j, int k) const { return entries_(j, k); }

 private:
  DensityMatrix(ComplexMatrix entries, Representation rep)
      : entries_(std::move(entries)), rep_(rep) {}

  ComplexMatrix entries_;
  Representation rep_;
};

/// max |A - A^dagger|
double hermiticity_residual(const ComplexMatrix& a);
/// (A + A^dagger)/2, symmetric bit-for-bit.
ComplexMatrix hermitian_part(const ComplexMatrix& a);
/// Smallest eigenvalue of the Hermitian part.
double min_eigenvalue(const ComplexMatrix& a);

/// out[(j+steps) mod N, (k+steps) mod N] = in[j,k]: conjugation by
/// exp(-i a p) with a = steps dx.
ComplexMatrix position_shift(const ComplexMatrix& rho, int steps);
DensityMatrix position_shift(const DensityMatrix& rho, int steps);

/// out[j,k] = exp(i q (x_j - x_k)) in[j,k] for position-representation input.
/// q must be an integer multiple of dq (within 1e-9 relative).
ComplexMatrix momentum_boost(const Grid& grid, const ComplexMatrix& rho, double q);
DensityMatrix momentum_boost(const Grid& grid, const DensityMatrix& rho, double q);
/// Same boost for an integer number of momentum steps.
ComplexMatrix momentum_boost_steps(const Grid& grid, const ComplexMatrix& rho, int steps);

/// F rho F^dagger with F the unitary DFT matched to (x_values, p_values).
ComplexMatrix to_momentum(const ComplexMatrix& rho);
/// F^dagger rho F
ComplexMatrix to_position(const ComplexMatrix& rho_p);

DensityMatrix to_momentum_representation(const DensityMatrix& rho);
DensityMatrix to_position_representation(const DensityMatrix& rho);

/// Spectral momentum operator F^dagger diag(p) F in position representation.
ComplexMatrix momentum_operator(const Grid& grid);
/// Diagonal position operator.
ComplexMatrix position_operator(const Grid& grid);

}  // namespace tcme
