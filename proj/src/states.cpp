#include "tcme/states.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>

#include <boost/math/tools/roots.hpp>
#include <fmt/format.h>

namespace tcme {
namespace {

Eigen::VectorXcd gaussian_amplitude(const Grid& grid, double x0, double p0, double sigma) {
  Eigen::VectorXcd psi(grid.n_points());
  for (int j = 0; j < grid.n_points(); ++j) {
    const double x = grid.x(j);
    const double u = (x - x0) / (2.0 * sigma);
    psi(j) = std::polar(std::exp(-u * u), p0 * x);
  }
  return psi;
}

void require_packet_fits(const Grid& grid, double x0, double sigma, const char* what) {
  if (!(sigma >= 2.0 * grid.dx() * (1.0 - 1e-12))) {
    throw std::invalid_argument(
        fmt::format("{}: sigma {} under-resolved (needs >= 2 dx = {})", what, sigma, 2 * grid.dx()));
  }
  const double lo = -0.5 * grid.length();
  const double hi = 0.5 * grid.length();
  const double margin = 4.0 * sigma * (1.0 - 1e-12);
  if (x0 - lo < margin || hi - x0 < margin) {
    throw std::invalid_argument(
        fmt::format("{}: packet at {} closer than 4 sigma to the grid boundary", what, x0));
  }
}

DensityMatrix projector(Eigen::VectorXcd psi) {
  psi /= psi.norm();
  ComplexMatrix rho = psi * psi.adjoint();
  return DensityMatrix::from_matrix(hermitian_part(rho));
}

}  // namespace

int lattice_index(const Grid& grid, double x) {
  const double u = (x + 0.5 * grid.length()) / grid.dx();
  const long j = std::lround(u);
  if (j < 0 || j >= grid.n_points()) {
    throw std::invalid_argument(fmt::format("position {} lies outside the grid", x));
  }
  return static_cast<int>(j);
}

DensityMatrix gaussian_packet(const Grid& grid, double x0, double p0, double sigma) {
  require_packet_fits(grid, x0, sigma, "gaussian_packet");
  return projector(gaussian_amplitude(grid, x0, p0, sigma));
}

DensityMatrix cat_state(const Grid& grid, double separation, double sigma) {
  if (!(separation >= 6.0 * sigma * (1.0 - 1e-12)) || !(sigma > 0.0)) {
    throw std::invalid_argument(fmt::format(
        "cat_state: separation {} must be >= 6 sigma = {}", separation, 6.0 * sigma));
  }
  const double half = 0.5 * separation;
  require_packet_fits(grid, half, sigma, "cat_state");
  require_packet_fits(grid, -half, sigma, "cat_state");
  for (double centre : {half, -half}) {
    const double u = (centre + 0.5 * grid.length()) / grid.dx();
    if (std::abs(u - std::round(u)) > 1e-9) {
      throw std::invalid_argument(
          fmt::format("cat_state: packet centre {} is not a lattice point", centre));
    }
  }
  Eigen::VectorXcd psi =
      gaussian_amplitude(grid, half, 0.0, sigma) + gaussian_amplitude(grid, -half, 0.0, sigma);
  return projector(std::move(psi));
}

DensityMatrix thermal_momentum_state(const Grid& grid, double p2) {
  const double pmax = grid.p_max();
  if (!(p2 > 0.0) || p2 > 0.0625 * pmax * pmax) {
    throw std::invalid_argument(fmt::format(
        "thermal_momentum_state: <p^2> = {} outside (0, (p_max/4)^2 = {}]", p2, 0.0625 * pmax * pmax));
  }
  const int n = grid.n_points();
  auto weights = [&](double s2) {
    Eigen::VectorXd w(n);
    for (int a = 0; a < n; ++a) w(a) = std::exp(-grid.p(a) * grid.p(a) / (2.0 * s2));
    return Eigen::VectorXd(w / w.sum());
  };
  auto moment = [&](double s2) {
    const Eigen::VectorXd w = weights(s2);
    double m = 0.0;
    for (int a = 0; a < n; ++a) m += w(a) * grid.p(a) * grid.p(a);
    return m - p2;
  };
  // The lattice moment is monotone in s^2; bracket generously around p2.
  double lo = 1e-3 * p2;
  double hi = 4.0 * p2;
  while (moment(lo) > 0.0) lo *= 0.5;
  std::uintmax_t iters = 200;
  auto [a, b] = boost::math::tools::toms748_solve(
      moment, lo, hi, boost::math::tools::eps_tolerance<double>(52), iters);
  const Eigen::VectorXd w = weights(0.5 * (a + b));

  ComplexMatrix rho_p = ComplexMatrix::Zero(n, n);
  for (int k = 0; k < n; ++k) rho_p(k, k) = w(k);
  return DensityMatrix::from_matrix(hermitian_part(to_position(rho_p)));
}

DensityMatrix plane_wave(const Grid& grid, int momentum_index) {
  const int n = grid.n_points();
  if (momentum_index < 0 || momentum_index >= n) {
    throw std::invalid_argument("plane_wave: momentum index out of range");
  }
  Eigen::VectorXcd psi(n);
  for (int j = 0; j < n; ++j) psi(j) = std::polar(1.0, grid.p(momentum_index) * grid.x(j));
  return projector(std::move(psi));
}

DensityMatrix maximally_mixed(const Grid& grid) {
  const int n = grid.n_points();
  ComplexMatrix rho = ComplexMatrix::Identity(n, n) / static_cast<double>(n);
  return DensityMatrix::from_matrix(std::move(rho));
}

ObservableSet measure(const DensityMatrix& rho_in, const Grid& grid, double mass,
                      const std::vector<CoherenceSite>& sites) {
  if (rho_in.size() != grid.n_points()) {
    throw std::invalid_argument("measure: grid/state size mismatch");
  }
  const ComplexMatrix rho = rho_in.representation() == Representation::Position
                                ? rho_in.matrix()
                                : to_position(rho_in.matrix());
  const ComplexMatrix rho_p = to_momentum(rho);
  const int n = grid.n_points();

  ObservableSet out{};
  out.trace = rho.trace();
  // Tr rho^2 = sum |rho_jk|^2 for Hermitian rho
  out.purity = rho.cwiseAbs2().sum();

  double mx = 0.0, mx2 = 0.0, mp = 0.0, mp2 = 0.0;
  for (int j = 0; j < n; ++j) {
    const double pop = rho(j, j).real();
    mx += grid.x(j) * pop;
    mx2 += grid.x(j) * grid.x(j) * pop;
    const double pop_p = rho_p(j, j).real();
    mp += grid.p(j) * pop_p;
    mp2 += grid.p(j) * grid.p(j) * pop_p;
  }
  // Plain expectation values Tr(O rho): no division by the trace, so trace
  // drift stays visible in the moments.
  out.mean_x = mx;
  out.var_x = mx2 - mx * mx;
  out.mean_p = mp;
  out.second_moment_p = mp2;
  out.kinetic_energy = out.second_moment_p / (2.0 * mass);

  for (const auto& s : sites) {
    if (s.row < 0 || s.row >= n || s.col < 0 || s.col >= n) {
      throw std::invalid_argument("measure: coherence site outside the grid");
    }
    out.coherence_samples.push_back({grid.x(s.row), grid.x(s.col), rho(s.row, s.col)});
  }
  return out;
}

}  // namespace tcme
