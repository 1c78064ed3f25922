#pragma once

// Translation-covariant dissipators on the periodic lattice:
//
//   GRW               -lambda (1 - exp(-alpha s^2 / 4)) element-wise in position
//   MomentumTransfer  -lambda (rho - sum_q w(q) U_q rho U_q^dagger)
//   CollisionalZeroE   sum_q w(q) (U_q rho U_q^dagger - rho), w unnormalised
//   LinearBoltzmann    sum_q w(q) (L_q rho L_q^dagger - {L_q^dagger L_q, rho}/2),
//                      L_q = U_q sqrt(S(q, E(q, p)))
//   DissipativeQbm    -(lb/2)[x,[x,rho]] - (lb ab^2/2)[p,[p,rho]] - i lb ab [x,{p,rho}]
//
// U_q = exp(i q x) is the lattice momentum boost; q runs over multiples of dq.
// Position commutators use minimum-image separations so every generator
// commutes exactly with lattice translations.

#include <functional>
#include <variant>
#include <vector>

#include "tcme/lattice.hpp"

namespace tcme {

struct GrwParams {
  double lambda;  // localisation rate
  double alpha;   // inverse length squared
};

struct QbmParams {
  double lambda_bar;
  double alpha_bar;
};

/// Nonnegative weights w(k dq) for k in [-k_max, k_max].
class TransferKernel {
 public:
  TransferKernel(double dq, int k_max, std::vector<double> weights);

  double dq() const { return dq_; }
  int k_max() const { return k_max_; }
  double q(int k) const { return k * dq_; }
  double weight(int k) const;
  const std::vector<double>& weights() const { return weights_; }

  double total() const;
  double second_moment() const;  // sum w(q) q^2
  /// sum_q w(q) exp(i q s)
  Complex fourier_sum(double s) const;

 private:
  double dq_;
  int k_max_;
  std::vector<double> weights_;
};

/// Probability distribution over lattice momentum transfers (sum w = 1).
class MomentumTransferDistribution {
 public:
  /// Normalises the kernel; throws if its total weight is zero.
  explicit MomentumTransferDistribution(TransferKernel kernel);

  const TransferKernel& kernel() const { return kernel_; }
  double weight(int k) const { return kernel_.weight(k); }
  int k_max() const { return kernel_.k_max(); }
  double dq() const { return kernel_.dq(); }
  double second_moment() const { return kernel_.second_moment(); }

 private:
  TransferKernel kernel_;
};

/// Weights ~ exp(-q^2/alpha) (variance alpha/2). Throws unless k_max dq
/// covers at least 8 standard deviations.
MomentumTransferDistribution gaussian_transfer_distribution(const Grid& grid, double alpha,
                                                            int k_max);
/// Smallest k_max accepted by gaussian_transfer_distribution, plus margin.
int gaussian_k_max(const Grid& grid, double alpha);

/// Equal weights on +k and -k.
MomentumTransferDistribution two_point_distribution(const Grid& grid, int k);

/// Phi(s) = sum_q w(q) exp(i q s)
Complex characteristic_function(const MomentumTransferDistribution& dist, double s);

/// Maxwell-Boltzmann dynamic structure factor
/// sqrt(beta m / 2 pi) / |q| exp(-beta/(8m) (2 m E + q^2)^2 / q^2).
double dynamic_structure_factor(double q, double energy, double gas_mass, double beta);

/// Energy transfer E(q, p) assigned to a collision with momentum transfer q.
enum class EnergyTransfer {
  Recoil,     // (p+q)^2/2M - p^2/2M = q^2/2M + p q/M
  HalfCrossTerm,  // q^2/2M + p q/(2M); does not satisfy detailed balance
};
double energy_transfer(double q, double p, double test_mass, EnergyTransfer convention);

struct LinearBoltzmannOptions {
  EnergyTransfer energy = EnergyTransfer::Recoil;
  /// Evaluate S at zero energy transfer (reduces to the collisional model).
  bool zero_energy_transfer = false;
};

enum class GeneratorKind { Grw, MomentumTransfer, CollisionalZeroEnergy, LinearBoltzmann, DissipativeQbm };

const char* to_string(GeneratorKind kind);

namespace detail {

// Element-wise position-space multipliers indexed by (j - k) mod n.
struct OffsetMultiplier {
  std::vector<Complex> values;
};

struct GrwModel {
  GrwParams params;
  OffsetMultiplier closed_form;   // -lambda (1 - exp(-alpha s^2/4)), s minimum image
  OffsetMultiplier lattice_sum;   // -lambda (1 - sum_q w(q) exp(i q s))
  MomentumTransferDistribution distribution;
};

struct MomentumTransferModel {
  double lambda;
  MomentumTransferDistribution distribution;
  OffsetMultiplier multiplier;
};

struct CollisionalModel {
  TransferKernel kernel;
  OffsetMultiplier multiplier;
};

struct LinearBoltzmannModel {
  TransferKernel kernel;
  double test_mass;
  double gas_mass;
  double beta;
  LinearBoltzmannOptions options;
  std::vector<int> steps;                      // nonzero-weight transfers
  std::vector<double> weights;                 // w(q) for each step
  std::vector<std::vector<double>> sqrt_rate;  // sqrt S(q, E(q, p_a)) per step, per a
  std::vector<double> loss;                    // sum_q w(q) S(q, E(q, p_a))
};

struct QbmModel {
  QbmParams params;
};

using Model = std::variant<GrwModel, MomentumTransferModel, CollisionalModel,
                           LinearBoltzmannModel, QbmModel>;

}  // namespace detail

/// Immutable description of one dissipator bound to a grid.
class GeneratorSpec {
 public:
  GeneratorSpec(Grid grid, detail::Model model);

  GeneratorKind kind() const;
  const Grid& grid() const { return grid_; }
  const detail::Model& model() const { return model_; }

  /// True for variants whose action is element-wise in position.
  bool is_c_number() const;
  /// Position-space multiplier by index offset; only for c-number variants.
  const std::vector<Complex>& offset_multiplier() const;

 private:
  Grid grid_;
  detail::Model model_;
};

GeneratorSpec grw_generator(const Grid& grid, const GrwParams& params);
GeneratorSpec momentum_transfer_generator(const Grid& grid, double lambda,
                                          const MomentumTransferDistribution& dist);
GeneratorSpec collisional_zero_energy_generator(const Grid& grid, const TransferKernel& kernel);
GeneratorSpec linear_boltzmann_generator(const Grid& grid, const TransferKernel& kernel,
                                         double test_mass, double gas_mass, double beta,
                                         LinearBoltzmannOptions options = {});
GeneratorSpec qbm_generator(const Grid& grid, const QbmParams& params);

/// Per-particle parameters for mass m: lambda_bar = (m/m0) lambda0,
/// alpha_bar = (m0/m) alpha0.
QbmParams mass_scaled_params(double m, double m0, double lambda0, double alpha0);

enum class CNumberPath {
  Multiplier,  // closed element-wise multiplier
  BoostSum,    // explicit sum over boosted copies (cross-check)
};

struct ApplyOptions {
  CNumberPath path = CNumberPath::Multiplier;
};

/// d rho/dt contribution of the dissipator for a position-representation
/// matrix. Output is Hermitian bit-for-bit when the input is.
ComplexMatrix apply_generator(const GeneratorSpec& spec, const ComplexMatrix& rho,
                    const ApplyOptions& options = {});
ComplexMatrix apply_generator(const GeneratorSpec& spec, const DensityMatrix& rho,
                    const ApplyOptions& options = {});

/// Upper bound on the superoperator norm of the dissipator, used for the
/// integrator's step-size guard.
double rate_bound(const GeneratorSpec& spec);

/// Total escape rate of the zero-momentum state:
/// sum_q w(q) for c-number kernels, sum_q w(q) S(q, E(q, 0)) for
/// LinearBoltzmann, lambda for GRW/MomentumTransfer. Zero for QBM.
double effective_rate(const GeneratorSpec& spec);

namespace detail {
/// Linear extension of the dissipator to arbitrary (non-Hermitian) square
/// matrices; apply_generator() returns its Hermitian part for LinearBoltzmann and QBM.
ComplexMatrix apply_linear(const GeneratorSpec& spec, const ComplexMatrix& rho);
}  // namespace detail

using Superoperator = std::function<ComplexMatrix(const ComplexMatrix&)>;

/// max |L[T rho T^dagger] - T L[rho] T^dagger| for T = position_shift(steps).
double check_translation_covariance(const Superoperator& generator, const ComplexMatrix& rho,
                                    int steps);
double check_translation_covariance(const GeneratorSpec& spec, const DensityMatrix& rho,
                                    int steps);

}  // namespace tcme
