#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "tcme/params.hpp"

using namespace tcme;

namespace {

constexpr double kPi = std::numbers::pi;

// Lanczos (g = 7, n = 9) with reflection; independent of std::tgamma.
double lanczos_gamma(double z) {
  static const double c[] = {0.99999999999980993,  676.5203681218851,     -1259.1392167224028,
                             771.32342877765313,   -176.61502916214059,   12.507343278686905,
                             -0.13857109526572012, 9.9843695780195716e-6, 1.5056327351493116e-7};
  if (z < 0.5) return kPi / (std::sin(kPi * z) * lanczos_gamma(1.0 - z));
  z -= 1.0;
  double x = c[0];
  for (int i = 1; i < 9; ++i) x += c[i] / (z + i);
  const double t = z + 7.5;
  return std::sqrt(2.0 * kPi) * std::pow(t, z + 0.5) * std::exp(-t) * x;
}

GasParams helium() {
  return {2.5e25, 4.002602 * kAtomicMassUnit, 1.0 / (kCodata2018.boltzmann * 300.0), 1e-60,
          1e-25};
}

}  // namespace

TEST_CASE("thermal wavelength") {
  const PhysicalConstants natural{1.0, 1.0};
  CHECK(thermal_wavelength(1.0, 2.0 * kPi, natural) == doctest::Approx(2.0 * kPi).epsilon(1e-15));
  CHECK(thermal_wavelength(3.0, 4.0 * 0.7) / thermal_wavelength(3.0, 0.7) ==
        doctest::Approx(2.0).epsilon(1e-15));
  // h / sqrt(2 pi m k_B T) with Planck's constant typed in directly.
  const double h = 6.62607015e-34;
  const double m = 4.002602 * 1.66053906660e-27;
  const double hand = h / std::sqrt(2.0 * kPi * m * 1.380649e-23 * 300.0);
  const GasParams g = helium();
  CHECK(thermal_wavelength(g.gas_mass, g.beta) == doctest::Approx(hand).epsilon(1e-12));
  CHECK(thermal_wavelength(g.gas_mass, g.beta) == doctest::Approx(5.05e-11).epsilon(1e-2));
  CHECK_THROWS_AS(thermal_wavelength(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(thermal_wavelength(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("power-law Fourier coefficient") {
  CHECK(std::abs(lanczos_gamma(-0.25) / lanczos_gamma(1.75) + 16.0 / 3.0) < 1e-12);
  CHECK(std::abs(power_law_fourier_coefficient() + 4.0 / 3.0) < 1e-12);
  const double mu = -3.5;
  const double oracle =
      std::pow(2.0, mu + 1.5) * lanczos_gamma(mu / 2 + 1.5) / lanczos_gamma(-mu / 2);
  CHECK(power_law_gamma_factor(mu) == doctest::Approx(oracle).epsilon(1e-13));
  const double t1 = power_law_transform(1e-24, 1e-60);
  const double t2 = power_law_transform(2e-24, 1e-60);
  CHECK(t1 < 0.0);
  CHECK(t2 / t1 == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("collisional parameters") {
  const GasParams g = helium();
  const EquivalentGrw e = collisional_params(g);
  CHECK(e.alpha_coll * e.lambda_th * e.lambda_th == doctest::Approx(16.0 * kPi).epsilon(1e-15));
  GasParams dense = g;
  dense.density *= 2.0;
  CHECK(collisional_params(dense).lambda_coll / e.lambda_coll == doctest::Approx(2.0).epsilon(1e-15));
  GasParams strong = g;
  strong.coupling *= 2.0;
  CHECK(collisional_params(strong).lambda_coll / e.lambda_coll == doctest::Approx(4.0).epsilon(1e-15));
  GasParams bad = g;
  bad.beta = 0.0;
  CHECK_THROWS_AS(collisional_params(bad), std::invalid_argument);
  bad = g;
  bad.density = -1.0;
  CHECK_THROWS_AS(collisional_params(bad), std::invalid_argument);
}

TEST_CASE("dimensional scaling") {
  // Re-express the same gas in units where the metre is 1e-10 m, the
  // kilogram 1e-27 kg and the second 1e-15 s: dimensionless products stay put.
  const double ell = 1e-10, mu = 1e-27, tau = 1e-15;
  const double energy = mu * ell * ell / (tau * tau);
  const GasParams g = helium();
  const GasParams s{g.density * ell * ell * ell, g.gas_mass / mu, g.beta * energy,
                    g.coupling / (energy * std::pow(ell, 3.5)), g.test_mass / mu};
  const PhysicalConstants scaled{kCodata2018.hbar / (energy * tau), kCodata2018.boltzmann};
  const EquivalentGrw a = collisional_params(g);
  const EquivalentGrw b = collisional_params(s, scaled);
  CHECK(b.alpha_coll == doctest::Approx(a.alpha_coll * ell * ell).epsilon(1e-12));
  CHECK(b.lambda_coll == doctest::Approx(a.lambda_coll * tau).epsilon(1e-12));
  CHECK(b.lambda_th == doctest::Approx(a.lambda_th / ell).epsilon(1e-12));
}

TEST_CASE("collision kernel equals its Gaussian form") {
  const GasParams g = helium();
  const EquivalentGrw e = collisional_params(g);
  // exponent identity: beta/(8m) = 1/(alpha_coll hbar^2)
  CHECK(g.beta / (8.0 * g.gas_mass) * e.alpha_coll * kCodata2018.hbar * kCodata2018.hbar ==
        doctest::Approx(1.0).epsilon(1e-14));
  const std::vector<double> qs = equivalence_samples(g);
  REQUIRE(qs.size() == 100);
  CHECK(qs.back() / qs.front() == doctest::Approx(1e6).epsilon(1e-12));
  CHECK(equivalence_check(g, qs) <= 1e-10);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const GasParams r{g.density * std::pow(10.0, 2 * u(rng)), g.gas_mass * std::pow(10.0, u(rng)),
                      g.beta * std::pow(10.0, u(rng)), g.coupling * std::pow(10.0, 3 * u(rng)),
                      g.test_mass * std::pow(10.0, u(rng))};
    CHECK(equivalence_check(r, equivalence_samples(r)) <= 1e-10);
  }
  // Doubling the Gaussian width breaks the match away from q = 0.
  CHECK(equivalence_check(g, qs, GaussianExponent::DoubleWidth) > 0.5);

  GasParams free = g;
  free.coupling = 0.0;
  CHECK(gas_kernel_weight(free, qs[10]) == 0.0);
  CHECK(gaussian_kernel_weight(free, qs[10]) == 0.0);
  CHECK(equivalence_check(free, qs) == 0.0);
}

TEST_CASE("strength report") {
  const GasParams g = helium();
  const EquivalentGrw e = collisional_params(g);
  const StrengthReport same = strength_report({e.lambda_coll, e.alpha_coll}, g);
  CHECK(same.ratio == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(same.collisional.lambda_th == e.lambda_th);
  GasParams dense = g;
  dense.density *= 2.0;
  const StrengthReport base = strength_report({1e-16, 1e14}, g);
  const StrengthReport twice = strength_report({1e-16, 1e14}, dense);
  CHECK(twice.collisional_product / base.collisional_product == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(twice.grw_product == base.grw_product);
  CHECK_THROWS_AS(strength_report({0.0, 1.0}, g), std::invalid_argument);
}
