#include <doctest.h>

#include "tcme/evolve.hpp"
#include "test_support.hpp"

using namespace tcme;

namespace {

const Grid kGrid = make_grid(64, 32.0);

double lobe_error(const GeneratorSpec& spec, const DensityMatrix& cat, double dt, double t_final,
                  double lambda, double alpha, double d) {
  const int a = lattice_index(kGrid, 0.5 * d), b = lattice_index(kGrid, -0.5 * d);
  EvolutionConfig cfg;
  cfg.dt = dt;
  cfg.t_final = t_final;
  cfg.coherence_sites = {{a, b}};
  const TrajectoryRecord rec = evolve(cat, spec, cfg);
  const Complex c0 = cat(a, b);
  double worst = 0.0;
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    const Complex expected = c0 * analytic_offdiagonal_factor(lambda, alpha, d, rec.times[i]);
    worst = std::max(worst,
                     std::abs(rec.observables[i].coherence_samples[0].value - expected) /
                         std::abs(expected));
  }
  return worst;
}

}  // namespace

TEST_CASE("analytic helpers") {
  CHECK(analytic_offdiagonal_factor(1.0, 4.0, 1.0, 0.0) == 1.0);
  CHECK(analytic_offdiagonal_factor(1.0, 4.0, 0.0, 5.0) == 1.0);
  CHECK(analytic_offdiagonal_factor(1.0, 4.0, 1.0, 1.0) ==
        doctest::Approx(std::exp(-(1.0 - std::exp(-1.0)))).epsilon(1e-15));
  CHECK(analytic_offdiagonal_factor(1.0, 4.0, 1.0, 1.0) == doctest::Approx(0.531464).epsilon(1e-6));
  const QbmParams qp{1.0, 0.5};
  CHECK(qbm_second_moment_prediction(qp, 2.0, 0.0) == 2.0);
  CHECK(qbm_second_moment_prediction(qp, 2.0, 1e3) == doctest::Approx(0.5));
  CHECK(qbm_second_moment_prediction(qp, 0.5, 3.0) == 0.5);
}

TEST_CASE("zero generator leaves the state untouched") {
  const GeneratorSpec zero =
      collisional_zero_energy_generator(kGrid, TransferKernel(kGrid.dq(), 0, {0.0}));
  const DensityMatrix rho = DensityMatrix::from_matrix(testing::random_density(64, 3));
  EvolutionConfig cfg;
  cfg.dt = 0.01;
  cfg.t_final = 0.5;
  const TrajectoryRecord rec = evolve(rho, zero, cfg);
  CHECK(testing::max_abs(rec.final_state - rho.matrix()) == 0.0);
  CHECK(rec.times.size() == 51);
  CHECK(rec.max_trace_drift() == 0.0);
}

TEST_CASE("pure GRW decay of a cat coherence converges at fourth order") {
  const double lambda = 1.0, alpha = 0.05, d = 8.0;
  const GeneratorSpec spec = grw_generator(kGrid, {lambda, alpha});
  const DensityMatrix cat = cat_state(kGrid, d, 1.0);
  const double coarse = lobe_error(spec, cat, 0.1, 1.0, lambda, alpha, d);
  const double fine = lobe_error(spec, cat, 0.05, 1.0, lambda, alpha, d);
  CHECK(coarse < 1e-6);
  CHECK(coarse / fine > 14.0);
}

TEST_CASE("stability guard and step commensurability") {
  const GeneratorSpec spec = grw_generator(kGrid, {200.0, 4.0});
  const DensityMatrix rho = gaussian_packet(kGrid, 0.0, 0.0, 1.0);
  EvolutionConfig cfg;
  cfg.dt = 1e-3;
  cfg.t_final = 0.1;
  CHECK_THROWS_AS(evolve(rho, spec, cfg), std::invalid_argument);
  cfg.dt = 3e-4;
  CHECK_THROWS_AS(evolve(rho, grw_generator(kGrid, {1.0, 4.0}), cfg), std::invalid_argument);
  cfg.dt = 0.2;
  CHECK_THROWS_AS(evolve(rho, grw_generator(kGrid, {0.1, 4.0}), cfg), std::invalid_argument);
}

TEST_CASE("non-finite states are reported with their step") {
  const GeneratorSpec spec = grw_generator(kGrid, {1.0, 4.0});
  ComplexMatrix bad = gaussian_packet(kGrid, 0.0, 0.0, 1.0).matrix();
  bad(3, 3) = std::numeric_limits<double>::quiet_NaN();
  EvolutionConfig cfg;
  cfg.dt = 0.01;
  cfg.t_final = 0.1;
  try {
    evolve(DensityMatrix::trusted(bad), spec, cfg);
    FAIL("expected NonFiniteState");
  } catch (const NonFiniteState& e) {
    CHECK(e.step() == 1);
  }
}

TEST_CASE("GRW keeps means fixed and heats at lambda alpha / 2") {
  const double lambda = 1.0, alpha = 1.0;
  // 128 points keep the heavy tails of the kicked momentum distribution
  // clear of the band edge.
  const Grid g = make_grid(128, 25.0);
  const GeneratorSpec spec = grw_generator(g, {lambda, alpha});
  const DensityMatrix rho = gaussian_packet(g, 0.0, 0.3, 1.0);
  EvolutionConfig cfg;
  cfg.dt = 1.0 / 1600;
  cfg.t_final = 1.0;
  cfg.record_every = 160;
  cfg.include_free_hamiltonian = true;
  const TrajectoryRecord rec = evolve(rho, spec, cfg);
  const ObservableSet& first = rec.observables.front();
  for (std::size_t i = 1; i < rec.times.size(); ++i) {
    const ObservableSet& o = rec.observables[i];
    CHECK(std::abs(o.mean_p - first.mean_p) < 1e-8);
    const double slope = (o.second_moment_p - first.second_moment_p) / rec.times[i];
    CHECK(slope == doctest::Approx(lambda * alpha / 2.0).epsilon(5e-3));
  }
  CHECK(healthy(rec));
}

TEST_CASE("QBM second moment relaxes as predicted") {
  const Grid g = make_grid(64, 30.0);
  const QbmParams qp{1.0, 0.5};
  const GeneratorSpec spec = qbm_generator(g, qp);
  const DensityMatrix rho = gaussian_packet(g, 0.0, 0.0, 1.0);
  EvolutionConfig cfg;
  cfg.t_final = 1.0;
  cfg.dt = 1.0 / 2500;
  cfg.record_every = 250;
  REQUIRE(cfg.dt * stiffness(spec, cfg) <= 0.1);
  const TrajectoryRecord rec = evolve(rho, spec, cfg);
  const double p2_0 = rec.observables.front().second_moment_p;
  for (std::size_t i = 0; i < rec.times.size(); ++i) {
    const double predicted = qbm_second_moment_prediction(qp, p2_0, rec.times[i]);
    CHECK(rec.observables[i].second_moment_p == doctest::Approx(predicted).epsilon(1e-4));
  }
  CAPTURE(rec.max_trace_drift());
  CAPTURE(rec.max_hermiticity_drift());
  CAPTURE(rec.lowest_eigenvalue());
  CHECK(healthy(rec));
}
