#pragma once

#include <vector>

#include "tcme/lattice.hpp"

namespace tcme {

/// Lattice index pair (row, column) at which rho(x_row, x_col) is recorded.
struct CoherenceSite {
  int row;
  int col;
};

struct CoherenceSample {
  double x;
  double x_prime;
  Complex value;
};

struct ObservableSet {
  Complex trace;
  double purity;
  double mean_x;
  double mean_p;
  double var_x;
  double second_moment_p;  // <p^2>
  double kinetic_energy;   // <p^2>/(2M)
  std::vector<CoherenceSample> coherence_samples;
};

/// Pure Gaussian packet psi(x) ~ exp(-(x-x0)^2/(4 sigma^2) + i p0 x).
/// Requires x0 at least 4 sigma inside the grid and sigma >= 2 dx.
DensityMatrix gaussian_packet(const Grid& grid, double x0, double p0, double sigma);

/// Equal-weight superposition of Gaussian packets at +/- separation/2.
/// Requires separation >= 6 sigma, both packets 4 sigma inside the grid and
/// both centres on lattice points.
DensityMatrix cat_state(const Grid& grid, double separation, double sigma);

/// Mixed state diagonal in momentum with Gaussian weights exp(-p^2/(2 s^2)),
/// s tuned so that the lattice second moment equals p2 exactly.
DensityMatrix thermal_momentum_state(const Grid& grid, double p2);

/// Projector on the lattice plane wave with momentum index a.
DensityMatrix plane_wave(const Grid& grid, int momentum_index);

DensityMatrix maximally_mixed(const Grid& grid);

ObservableSet measure(const DensityMatrix& rho, const Grid& grid, double mass,
                      const std::vector<CoherenceSite>& sites = {});

/// Nearest lattice index to position x (no wrapping; throws if outside).
int lattice_index(const Grid& grid, double x);

}  // namespace tcme
