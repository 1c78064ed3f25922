#include "tcme/multiparticle.hpp"

#include <cmath>

#include <fmt/format.h>
#include <unsupported/Eigen/KroneckerProduct>

namespace tcme {
namespace {

using StridedMap = Eigen::Map<ComplexMatrix, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;
using ConstStridedMap =
    Eigen::Map<const ComplexMatrix, 0, Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic>>;

int particle_points(const ComplexMatrix& total) {
  const auto n = static_cast<long>(std::lround(std::sqrt(static_cast<double>(total.rows()))));
  if (n * n != total.rows() || total.rows() != total.cols()) {
    throw std::invalid_argument(
        fmt::format("{}x{} is not a two-particle matrix", total.rows(), total.cols()));
  }
  return static_cast<int>(n);
}

void require_supported(const GeneratorSpec& spec) {
  if (!spec.is_c_number() && spec.kind() != GeneratorKind::DissipativeQbm) {
    throw std::invalid_argument(
        fmt::format("{} generators are not supported per particle", to_string(spec.kind())));
  }
}

// Slice (i1, j1) at fixed (i2, j2), or (i2, j2) at fixed (i1, j1).
struct SliceGeometry {
  Eigen::Index offset_step_ket, offset_step_bra;
  Eigen::Index inner, outer;
};

SliceGeometry slice_geometry(int n, int particle) {
  const Eigen::Index n1 = n, n2 = n1 * n1, n3 = n2 * n1;
  if (particle == 1) return {1, n2, n1, n3};
  return {n1, n3, 1, n2};
}

void add_particle_action(const GeneratorSpec& spec, const ComplexMatrix& total, int particle,
                         ComplexMatrix& out) {
  const int n = spec.grid().n_points();
  const SliceGeometry g = slice_geometry(n, particle);
  const Eigen::Stride<Eigen::Dynamic, Eigen::Dynamic> stride(g.outer, g.inner);
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      const Eigen::Index offset = a * g.offset_step_ket + b * g.offset_step_bra;
      const ConstStridedMap in(total.data() + offset, n, n, stride);
      StridedMap dst(out.data() + offset, n, n, stride);
      dst += detail::apply_linear(spec, ComplexMatrix(in));
    }
  }
}

ComplexMatrix sector_of(const ComplexMatrix& cm, int parity) {
  const int n = static_cast<int>(cm.rows()) / 2;
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (int v = 0; 2 * v + parity < 2 * n; ++v)
    for (int u = 0; 2 * u + parity < 2 * n; ++u) out(u, v) = cm(2 * u + parity, 2 * v + parity);
  return out;
}

}  // namespace

void check_two_particle_size(int n_points, bool allow_large) {
  if (n_points > kMaxParticlePoints && !allow_large) {
    throw std::invalid_argument(fmt::format(
        "two-particle grid with {} points per particle exceeds the cap of {} "
        "({} complex entries); set the large-grid override to proceed",
        n_points, kMaxParticlePoints, static_cast<double>(n_points) * n_points * n_points * n_points));
  }
}

TwoParticleState::TwoParticleState(Unchecked, Grid grid, ComplexMatrix entries, double mass1,
                                   double mass2)
    : grid_(std::move(grid)), entries_(std::move(entries)), mass1_(mass1), mass2_(mass2) {
  const Eigen::Index n = grid_.n_points();
  if (entries_.rows() != n * n || entries_.cols() != n * n) {
    throw std::invalid_argument("two-particle matrix does not match the grid");
  }
  if (!(mass1 > 0.0) || !(mass2 > 0.0)) throw std::invalid_argument("masses must be positive");
}

TwoParticleState::TwoParticleState(Grid grid, ComplexMatrix entries, double mass1, double mass2,
                                   bool allow_large)
    : TwoParticleState(Unchecked{}, std::move(grid), std::move(entries), mass1, mass2) {
  check_two_particle_size(grid_.n_points(), allow_large);
  const double herm = hermiticity_residual(entries_);
  if (herm > 1e-9) {
    throw std::invalid_argument(fmt::format("two-particle state not Hermitian ({:.3e})", herm));
  }
  if (std::abs(entries_.trace() - 1.0) > 1e-9) {
    throw std::invalid_argument("two-particle state does not have unit trace");
  }
  const double lowest = min_eigenvalue(entries_);
  if (lowest < -1e-9) {
    throw std::invalid_argument(
        fmt::format("two-particle state has negative eigenvalue {:.3e}", lowest));
  }
}

TwoParticleState TwoParticleState::trusted(Grid grid, ComplexMatrix entries, double mass1,
                                           double mass2) {
  return TwoParticleState(Unchecked{}, std::move(grid), std::move(entries), mass1, mass2);
}

TwoParticleState product_state(const Grid& grid, const DensityMatrix& rho1,
                               const DensityMatrix& rho2, double mass1, double mass2) {
  if (rho1.size() != grid.n_points() || rho2.size() != grid.n_points()) {
    throw std::invalid_argument("product_state: factor does not match the grid");
  }
  check_two_particle_size(grid.n_points());
  auto position = [](const DensityMatrix& r) {
    return r.representation() == Representation::Position ? r.matrix() : to_position(r.matrix());
  };
  ComplexMatrix total = Eigen::kroneckerProduct(position(rho1), position(rho2)).eval();
  return TwoParticleState::trusted(grid, hermitian_part(total), mass1, mass2);
}

ComplexMatrix trace_out_second(const ComplexMatrix& total, int n) {
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (int j1 = 0; j1 < n; ++j1)
    for (int i1 = 0; i1 < n; ++i1)
      for (int k = 0; k < n; ++k) out(i1, j1) += total(i1 * n + k, j1 * n + k);
  return out;
}

ComplexMatrix trace_out_first(const ComplexMatrix& total, int n) {
  ComplexMatrix out = ComplexMatrix::Zero(n, n);
  for (int j2 = 0; j2 < n; ++j2)
    for (int i2 = 0; i2 < n; ++i2)
      for (int k = 0; k < n; ++k) out(i2, j2) += total(k * n + i2, k * n + j2);
  return out;
}

ComplexMatrix apply_per_particle(const GeneratorSpec& spec, const ComplexMatrix& total,
                                 Particle which) {
  require_supported(spec);
  if (particle_points(total) != spec.grid().n_points()) {
    throw std::invalid_argument("apply_per_particle: grid/state size mismatch");
  }
  ComplexMatrix out = ComplexMatrix::Zero(total.rows(), total.cols());
  if (which != Particle::Second) add_particle_action(spec, total, 1, out);
  if (which != Particle::First) add_particle_action(spec, total, 2, out);
  return hermitian_part(out);
}

ComplexMatrix apply_per_particle(const GeneratorSpec& spec1, const GeneratorSpec& spec2,
                                 const ComplexMatrix& total) {
  require_supported(spec1);
  require_supported(spec2);
  if (!(spec1.grid() == spec2.grid()) || particle_points(total) != spec1.grid().n_points()) {
    throw std::invalid_argument("apply_per_particle: grid/state size mismatch");
  }
  ComplexMatrix out = ComplexMatrix::Zero(total.rows(), total.cols());
  add_particle_action(spec1, total, 1, out);
  add_particle_action(spec2, total, 2, out);
  return hermitian_part(out);
}

ComplexMatrix CenterOfMassState::sector(int parity) const {
  if (parity != 0 && parity != 1) throw std::invalid_argument("parity must be 0 or 1");
  return sector_of(entries, parity);
}

CenterOfMassState partial_trace_relative(const ComplexMatrix& total, const Grid& grid,
                                         bool equal_masses) {
  if (!equal_masses) {
    throw UnsupportedConfiguration(
        "relative-coordinate trace is only available for equal masses");
  }
  const int n = grid.n_points();
  if (particle_points(total) != n) {
    throw std::invalid_argument("partial_trace_relative: grid/state size mismatch");
  }
  CenterOfMassState cm{make_grid(2 * n, grid.length()), ComplexMatrix::Zero(2 * n, 2 * n)};
  for (int j1 = 0; j1 < n; ++j1) {
    for (int i1 = 0; i1 < n; ++i1) {
      for (int i2 = 0; i2 < n; ++i2) {
        const int j2 = j1 - (i1 - i2);  // equal relative index
        if (j2 < 0 || j2 >= n) continue;
        cm.entries(i1 + i2, j1 + j2) += total(i1 * n + i2, j1 * n + j2);
      }
    }
  }
  return cm;
}

CenterOfMassState partial_trace_relative(const TwoParticleState& state) {
  return partial_trace_relative(state.matrix(), state.grid(), state.mass1() == state.mass2());
}

ComplexMatrix apply_center_of_mass(const GeneratorSpec& spec, const CenterOfMassState& cm) {
  const int n = spec.grid().n_points();
  if (cm.entries.rows() != 2 * n) {
    throw std::invalid_argument("apply_center_of_mass: generator grid does not match the state");
  }
  ComplexMatrix out = ComplexMatrix::Zero(2 * n, 2 * n);
  for (int parity = 0; parity < 2; ++parity) {
    const ComplexMatrix block = apply_generator(spec, cm.sector(parity));
    for (int v = 0; 2 * v + parity < 2 * n; ++v)
      for (int u = 0; 2 * u + parity < 2 * n; ++u) out(2 * u + parity, 2 * v + parity) = block(u, v);
  }
  return out;
}

CenterOfMassMoments measure_center_of_mass(const CenterOfMassState& cm, const Grid& grid) {
  const Grid& half = cm.half_step_grid;
  CenterOfMassMoments out{};
  out.trace = cm.entries.trace();
  double mx = 0.0, mx2 = 0.0;
  for (int c = 0; c < half.n_points(); ++c) {
    const double pop = cm.entries(c, c).real();
    mx += half.x(c) * pop;
    mx2 += half.x(c) * half.x(c) * pop;
  }
  out.mean_x = mx;
  out.var_x = mx2 - mx * mx;
  for (int parity = 0; parity < 2; ++parity) {
    const ComplexMatrix block_p = to_momentum(cm.sector(parity));
    for (int a = 0; a < grid.n_points(); ++a) {
      out.mean_p += grid.p(a) * block_p(a, a).real();
      out.second_moment_p += grid.p(a) * grid.p(a) * block_p(a, a).real();
    }
  }
  return out;
}

double total_momentum(const ComplexMatrix& total, const Grid& grid) {
  const int n = grid.n_points();
  const ComplexMatrix p1 = to_momentum(trace_out_second(total, n));
  const ComplexMatrix p2 = to_momentum(trace_out_first(total, n));
  double sum = 0.0;
  for (int a = 0; a < n; ++a) sum += grid.p(a) * (p1(a, a).real() + p2(a, a).real());
  return sum;
}

double cnumber_amplification_residual(const GeneratorSpec& spec1, const GeneratorSpec& spec2,
                                      const GeneratorSpec& cm_spec, const ComplexMatrix& probe) {
  if (!spec1.is_c_number() || !spec2.is_c_number() || !cm_spec.is_c_number()) {
    throw std::invalid_argument("c-number amplification check needs c-number generators");
  }
  const Grid& grid = spec1.grid();
  const CenterOfMassState lhs =
      partial_trace_relative(apply_per_particle(spec1, spec2, probe), grid);
  const CenterOfMassState reduced = partial_trace_relative(probe, grid);
  const ComplexMatrix rhs = apply_generator(cm_spec, reduced.entries);
  return (lhs.entries - rhs).cwiseAbs().maxCoeff();
}

double grw_amplification_residual(const Grid& grid, const GrwParams& params,
                                  const ComplexMatrix& probe) {
  const GeneratorSpec single = grw_generator(grid, params);
  const GeneratorSpec cm =
      grw_generator(make_grid(2 * grid.n_points(), grid.length()), {2.0 * params.lambda, params.alpha});
  return cnumber_amplification_residual(single, single, cm, probe);
}

double qbm_amplification_residual(double m0, double lambda0, double alpha0,
                                  const TwoParticleState& probe) {
  if (probe.mass1() != probe.mass2()) {
    throw UnsupportedConfiguration("QBM amplification check needs equal masses");
  }
  const double m = probe.mass1();
  const Grid& grid = probe.grid();
  const GeneratorSpec single = qbm_generator(grid, mass_scaled_params(m, m0, lambda0, alpha0));
  const GeneratorSpec cm = qbm_generator(grid, mass_scaled_params(2.0 * m, m0, lambda0, alpha0));
  const CenterOfMassState lhs =
      partial_trace_relative(apply_per_particle(single, probe.matrix(), Particle::Both), grid);
  const ComplexMatrix rhs = apply_center_of_mass(cm, partial_trace_relative(probe));
  return (lhs.entries - rhs).cwiseAbs().maxCoeff();
}

}  // namespace tcme
