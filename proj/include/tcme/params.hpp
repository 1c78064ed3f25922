#pragma once

// SI closed-form arithmetic for a test particle in a dilute Maxwell-Boltzmann
// gas with a power-law interaction t(x) = K / x^(7/2): the thermal wavelength,
// the equivalent localisation parameters (alpha_coll, lambda_coll) and the
// comparison against user-supplied GRW parameters. Pure 3-D formulas; nothing
// here touches the 1-D lattice.

#include <vector>

namespace tcme {

struct PhysicalConstants {
  double hbar;       // J s
  double boltzmann;  // J / K
};

/// CODATA 2018 exact/recommended values.
inline constexpr PhysicalConstants kCodata2018{1.054571817e-34, 1.380649e-23};
inline constexpr double kAtomicMassUnit = 1.66053906660e-27;  // kg

struct GasParams {
  double density;       // n, m^-3
  double gas_mass;      // m, kg
  double beta;          // 1/(k_B T), J^-1
  double coupling;      // K, J m^(7/2)
  double test_mass;     // M, kg
};

/// Throws std::invalid_argument unless every field is finite and > 0
/// (coupling may be zero).
void validate(const GasParams& gas);

struct EquivalentGrw {
  double alpha_coll;   // m^-2
  double lambda_coll;  // s^-1
  double lambda_th;    // m
};

/// sqrt(2 pi beta hbar^2 / m)
double thermal_wavelength(double mass, double beta, const PhysicalConstants& c = kCodata2018);

/// 2^(mu + 3/2) Gamma(mu/2 + 3/2) / Gamma(-mu/2): the coefficient of the
/// 3-D Fourier transform of x^mu.
double power_law_gamma_factor(double mu);

/// The x^(-7/2) case of power_law_gamma_factor; equals -4/3.
double power_law_fourier_coefficient();

/// t~(q) = -(4/3) K (2 pi)^(3/2) / (2 pi hbar)^3 (q/hbar)^(1/2), with the
/// the (2 pi hbar)^3 normalisation under which lambda_coll matches the kernel.
double power_law_transform(double q, double coupling, const PhysicalConstants& c = kCodata2018);

/// alpha_coll = 16 pi / lambda_th^2,
/// lambda_coll = n m alpha_coll (8/9) (2 pi/hbar)^3 K^2 / pi.
EquivalentGrw collisional_params(const GasParams& gas, const PhysicalConstants& c = kCodata2018);

/// Zero-energy-transfer collision weight
/// (2 pi/hbar)(2 pi hbar)^3 n sqrt(beta m / 2 pi) |t~(q)|^2 / q exp(-beta q^2 / 8m).
double gas_kernel_weight(const GasParams& gas, double q, const PhysicalConstants& c = kCodata2018);

enum class GaussianExponent {
  Matched,      // exp(-q^2 / (alpha_coll hbar^2)), matching alpha_coll and the prefactor
  DoubleWidth,  // exp(-q^2 / (2 alpha_coll hbar^2))
};

/// lambda_coll (1/(alpha_coll pi hbar^2))^(3/2) exp(-q^2/(s alpha_coll hbar^2)).
double gaussian_kernel_weight(const GasParams& gas, double q,
                              GaussianExponent exponent = GaussianExponent::Matched,
                              const PhysicalConstants& c = kCodata2018);

/// max over samples of |w - gaussian| / gaussian; 0/0 counts as 0.
double equivalence_check(const GasParams& gas, const std::vector<double>& q_samples,
                         GaussianExponent exponent = GaussianExponent::Matched,
                         const PhysicalConstants& c = kCodata2018);

/// count samples log-spaced from 1e-5 to 10 times sqrt(m / beta).
std::vector<double> equivalence_samples(const GasParams& gas, int count = 100);

struct GrwSi {
  double lambda;  // s^-1
  double alpha;   // m^-2
};

struct StrengthReport {
  GrwSi grw;
  EquivalentGrw collisional;
  double grw_product;          // alpha lambda, m^-2 s^-1
  double collisional_product;  // alpha_coll lambda_coll
  double ratio;                // collisional / grw
};

/// Reports both localisation strengths; makes no judgement.
StrengthReport strength_report(const GrwSi& grw, const GasParams& gas,
                               const PhysicalConstants& c = kCodata2018);

}  // namespace tcme
