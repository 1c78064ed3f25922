#include "tcme/params.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace tcme {
namespace {

constexpr double kPi = std::numbers::pi;

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || !(v > 0.0)) {
    throw std::invalid_argument(fmt::format("{} must be finite and > 0, got {}", name, v));
  }
}

}  // namespace

void validate(const GasParams& gas) {
  require_positive(gas.density, "gas density");
  require_positive(gas.gas_mass, "gas particle mass");
  require_positive(gas.beta, "beta");
  require_positive(gas.test_mass, "test particle mass");
  if (!std::isfinite(gas.coupling)) throw std::invalid_argument("coupling K must be finite");
}

double thermal_wavelength(double mass, double beta, const PhysicalConstants& c) {
  require_positive(mass, "mass");
  require_positive(beta, "beta");
  return std::sqrt(2.0 * kPi * beta * c.hbar * c.hbar / mass);
}

double power_law_gamma_factor(double mu) {
  return std::pow(2.0, mu + 1.5) * std::tgamma(0.5 * mu + 1.5) / std::tgamma(-0.5 * mu);
}

double power_law_fourier_coefficient() { return power_law_gamma_factor(-3.5); }

double power_law_transform(double q, double coupling, const PhysicalConstants& c) {
  const double two_pi_hbar = 2.0 * kPi * c.hbar;
  return power_law_fourier_coefficient() * coupling * std::pow(2.0 * kPi, 1.5) /
         (two_pi_hbar * two_pi_hbar * two_pi_hbar) * std::sqrt(q / c.hbar);
}

EquivalentGrw collisional_params(const GasParams& gas, const PhysicalConstants& c) {
  validate(gas);
  const double lambda_th = thermal_wavelength(gas.gas_mass, gas.beta, c);
  const double alpha = 16.0 * kPi / (lambda_th * lambda_th);
  const double k = 2.0 * kPi / c.hbar;
  const double lambda =
      gas.density * gas.gas_mass * alpha * (8.0 / 9.0) * k * k * k * gas.coupling * gas.coupling / kPi;
  return {alpha, lambda, lambda_th};
}

double gas_kernel_weight(const GasParams& gas, double q, const PhysicalConstants& c) {
  require_positive(q, "momentum transfer");
  const double two_pi_hbar = 2.0 * kPi * c.hbar;
  const double t = power_law_transform(q, gas.coupling, c);
  return 2.0 * kPi / c.hbar * two_pi_hbar * two_pi_hbar * two_pi_hbar * gas.density *
         std::sqrt(gas.beta * gas.gas_mass / (2.0 * kPi)) * t * t / q *
         std::exp(-gas.beta * q * q / (8.0 * gas.gas_mass));
}

double gaussian_kernel_weight(const GasParams& gas, double q, GaussianExponent exponent,
                              const PhysicalConstants& c) {
  const EquivalentGrw e = collisional_params(gas, c);
  const double scale = exponent == GaussianExponent::Matched ? 1.0 : 2.0;
  const double width = e.alpha_coll * c.hbar * c.hbar;
  return e.lambda_coll * std::pow(1.0 / (kPi * width), 1.5) * std::exp(-q * q / (scale * width));
}

double equivalence_check(const GasParams& gas, const std::vector<double>& q_samples,
                         GaussianExponent exponent, const PhysicalConstants& c) {
  double worst = 0.0;
  for (double q : q_samples) {
    const double w = gas_kernel_weight(gas, q, c);
    const double g = gaussian_kernel_weight(gas, q, exponent, c);
    if (w == 0.0 && g == 0.0) continue;
    worst = std::max(worst, std::abs(w - g) / std::abs(g));
  }
  return worst;
}

std::vector<double> equivalence_samples(const GasParams& gas, int count) {
  validate(gas);
  if (count < 2) throw std::invalid_argument("need at least two samples");
  const double q_th = std::sqrt(gas.gas_mass / gas.beta);
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) {
    out[i] = q_th * std::pow(10.0, -5.0 + 6.0 * i / (count - 1));
  }
  return out;
}

StrengthReport strength_report(const GrwSi& grw, const GasParams& gas,
                               const PhysicalConstants& c) {
  require_positive(grw.lambda, "GRW lambda");
  require_positive(grw.alpha, "GRW alpha");
  StrengthReport r{grw, collisional_params(gas, c), 0.0, 0.0, 0.0};
  r.grw_product = grw.alpha * grw.lambda;
  r.collisional_product = r.collisional.alpha_coll * r.collisional.lambda_coll;
  r.ratio = r.collisional_product / r.grw_product;
  return r;
}

}  // namespace tcme
