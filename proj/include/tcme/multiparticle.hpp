#pragma once

// Two distinguishable particles on a shared periodic lattice. The joint
// state is an N^2 x N^2 matrix with row index i1 * N + i2 (particle 1 major).
//
// The centre-of-mass coordinate X = (x1 + x2)/2 lives on the half-step
// lattice of 2N points and spacing dx/2; label c = i1 + i2. Tracing out the
// relative coordinate only couples labels of equal parity, so the reduced
// state splits into an even and an odd block, each an N-point lattice of
// spacing dx.

#include <stdexcept>

#include "tcme/generators.hpp"
#include "tcme/lattice.hpp"

namespace tcme {

class UnsupportedConfiguration : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Largest per-particle grid accepted without an explicit override.
inline constexpr int kMaxParticlePoints = 64;

/// Throws std::invalid_argument when n_points exceeds kMaxParticlePoints and
/// allow_large is false.
void check_two_particle_size(int n_points, bool allow_large = false);

class TwoParticleState {
 public:
  /// Validates Hermiticity, unit trace and positivity to 1e-9.
  TwoParticleState(Grid grid, ComplexMatrix entries, double mass1 = 1.0, double mass2 = 1.0,
                   bool allow_large = false);
  static TwoParticleState trusted(Grid grid, ComplexMatrix entries, double mass1 = 1.0,
                                  double mass2 = 1.0);

  const Grid& grid() const { return grid_; }
  const ComplexMatrix& matrix() const { return entries_; }
  double mass1() const { return mass1_; }
  double mass2() const { return mass2_; }

 private:
  struct Unchecked {};
  TwoParticleState(Unchecked, Grid grid, ComplexMatrix entries, double mass1, double mass2);

  Grid grid_;
  ComplexMatrix entries_;
  double mass1_;
  double mass2_;
};

TwoParticleState product_state(const Grid& grid, const DensityMatrix& rho1,
                               const DensityMatrix& rho2, double mass1 = 1.0, double mass2 = 1.0);

/// Reduced state of particle 1 (trace over particle 2) and vice versa.
ComplexMatrix trace_out_second(const ComplexMatrix& total, int n_points);
ComplexMatrix trace_out_first(const ComplexMatrix& total, int n_points);

enum class Particle { First, Second, Both };

/// Sum of single-particle dissipators on the chosen tensor factors. Only
/// c-number variants and DissipativeQbm are supported.
ComplexMatrix apply_per_particle(const GeneratorSpec& spec, const ComplexMatrix& total,
                                 Particle which);
/// Particle 1 evolves under spec1 and particle 2 under spec2.
ComplexMatrix apply_per_particle(const GeneratorSpec& spec1, const GeneratorSpec& spec2,
                                 const ComplexMatrix& total);

struct CenterOfMassState {
  Grid half_step_grid;   // 2N points, spacing dx/2, same length
  ComplexMatrix entries; // 2N x 2N, zero between labels of opposite parity

  /// Block of labels with the given parity (0 even, 1 odd) as an N x N
  /// matrix on the particle lattice.
  ComplexMatrix sector(int parity) const;
};

/// rho_CM(X, Y) = sum_r rho((X + r/2, X - r/2), (Y + r/2, Y - r/2)).
/// Throws UnsupportedConfiguration unless equal_masses.
CenterOfMassState partial_trace_relative(const ComplexMatrix& total, const Grid& grid,
                                         bool equal_masses = true);
CenterOfMassState partial_trace_relative(const TwoParticleState& state);

/// Applies a single-particle generator (built on the particle grid) to the
/// even and odd blocks of a centre-of-mass matrix separately.
ComplexMatrix apply_center_of_mass(const GeneratorSpec& spec, const CenterOfMassState& cm);

struct CenterOfMassMoments {
  Complex trace;
  double mean_x;
  double var_x;
  double mean_p;
  double second_moment_p;
};

/// Position moments on the half-step lattice; momentum moments block-wise
/// with the particle-lattice momentum operator.
CenterOfMassMoments measure_center_of_mass(const CenterOfMassState& cm, const Grid& grid);

/// <p1 + p2> of the joint state.
double total_momentum(const ComplexMatrix& total, const Grid& grid);

/// max |Tr_rel(L1 + L2)[rho] - L_CM[Tr_rel rho]| for c-number generators;
/// cm_spec lives on the half-step grid.
double cnumber_amplification_residual(const GeneratorSpec& spec1, const GeneratorSpec& spec2,
                                      const GeneratorSpec& cm_spec, const ComplexMatrix& probe);

/// Same with GRW(lambda, alpha) on both particles and GRW(2 lambda, alpha)
/// for the centre of mass.
double grw_amplification_residual(const Grid& grid, const GrwParams& params,
                                  const ComplexMatrix& probe);

/// Per-particle QBM parameters mass_scaled_params(m, m0, ...) against
/// centre-of-mass parameters mass_scaled_params(2m, m0, ...).
double qbm_amplification_residual(double m0, double lambda0, double alpha0,
                                  const TwoParticleState& probe);

}  // namespace tcme
