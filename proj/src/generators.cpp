#include "tcme/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <fmt/format.h>

namespace tcme {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_finite_nonnegative(double v, const char* name) {
  if (!std::isfinite(v) || v < 0.0) {
    throw std::invalid_argument(fmt::format("{} must be finite and >= 0, got {}", name, v));
  }
}

void require_positive(double v, const char* name) {
  if (!std::isfinite(v) || !(v > 0.0)) {
    throw std::invalid_argument(fmt::format("{} must be finite and > 0, got {}", name, v));
  }
}

void require_matching_dq(const Grid& grid, double dq) {
  if (std::abs(dq - grid.dq()) > 1e-12 * grid.dq()) {
    throw std::invalid_argument(
        fmt::format("transfer kernel spacing {} does not match grid dq {}", dq, grid.dq()));
  }
}

// sum_k w_k (1 - exp(2 pi i k m / n)), evaluated pairwise in k so that
// symmetric weights give an exactly real result.
Complex lattice_depletion(const TransferKernel& kernel, long m, int n) {
  double re = 0.0, im = 0.0;
  for (int k = 1; k <= kernel.k_max(); ++k) {
    const long phase_index = (static_cast<long>(k) * m) % n;
    const double theta = kTwoPi * static_cast<double>(phase_index) / n;
    const double half = std::sin(0.5 * theta);
    const double wp = kernel.weight(k), wm = kernel.weight(-k);
    re += (wp + wm) * 2.0 * half * half;
    im -= (wp - wm) * std::sin(theta);
  }
  return {re, im};
}

// Fill a multiplier table from its values at offsets 1..n/2 so that
// table[n-d] = conj(table[d]) and table[n/2] is real: that makes the
// element-wise product Hermitian bit-for-bit.
template <class F>
detail::OffsetMultiplier offset_table(int n, F&& value_at) {
  detail::OffsetMultiplier out;
  out.values.assign(n, Complex(0.0, 0.0));
  for (int d = 1; d < n / 2; ++d) {
    const Complex v = value_at(d);
    out.values[d] = v;
    out.values[n - d] = std::conj(v);
  }
  out.values[n / 2] = Complex(value_at(n / 2).real(), 0.0);
  return out;
}

detail::OffsetMultiplier depletion_table(const Grid& grid, const TransferKernel& kernel,
                                         double scale) {
  const int n = grid.n_points();
  return offset_table(n, [&](int d) { return -scale * lattice_depletion(kernel, d, n); });
}

void require_size(const GeneratorSpec& spec, const ComplexMatrix& rho) {
  const int n = spec.grid().n_points();
  if (rho.rows() != n || rho.cols() != n) {
    throw std::invalid_argument(fmt::format("generator on a {}-point grid applied to a {}x{} matrix",
                                            n, rho.rows(), rho.cols()));
  }
}

ComplexMatrix apply_multiplier(const std::vector<Complex>& table, const ComplexMatrix& rho) {
  const int n = static_cast<int>(rho.rows());
  ComplexMatrix out(n, n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      int d = j - k;
      if (d < 0) d += n;
      out(j, k) = table[d] * rho(j, k);
    }
  }
  return out;
}

// sum_q w(q) (U_q rho U_q^dagger - rho), summed in increasing k.
ComplexMatrix boost_sum(const Grid& grid, const TransferKernel& kernel, const ComplexMatrix& rho) {
  const int n = grid.n_points();
  ComplexMatrix acc = ComplexMatrix::Zero(n, n);
  double total = 0.0;
  for (int k = -kernel.k_max(); k <= kernel.k_max(); ++k) {
    const double w = kernel.weight(k);
    if (w == 0.0 || k == 0) continue;
    acc += w * momentum_boost_steps(grid, rho, k);
    total += w;
  }
  acc -= total * rho;
  return hermitian_part(acc);
}

ComplexMatrix apply_linear_boltzmann(const Grid& grid, const detail::LinearBoltzmannModel& model,
                                     const ComplexMatrix& rho) {
  const int n = grid.n_points();
  const ComplexMatrix rho_p = to_momentum(rho);
  ComplexMatrix out(n, n);
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) out(a, b) = -0.5 * (model.loss[a] + model.loss[b]) * rho_p(a, b);
  }
  for (std::size_t i = 0; i < model.steps.size(); ++i) {
    const int k = model.steps[i];
    const double w = model.weights[i];
    const std::vector<double>& s = model.sqrt_rate[i];
    for (int b = 0; b < n; ++b) {
      const int bs = ((b - k) % n + n) % n;
      const double wb = w * s[bs];
      for (int a = 0; a < n; ++a) {
        const int as = ((a - k) % n + n) % n;
        out(a, b) += (s[as] * wb) * rho_p(as, bs);
      }
    }
  }
  return to_position(out);
}

ComplexMatrix apply_qbm(const Grid& grid, const QbmParams& params, const ComplexMatrix& rho) {
  const int n = grid.n_points();
  const double lb = params.lambda_bar;
  const double ab = params.alpha_bar;
  ComplexMatrix rho_p = to_momentum(rho);
  ComplexMatrix p_double(n, n), p_anti(n, n);
  for (int b = 0; b < n; ++b) {
    for (int a = 0; a < n; ++a) {
      const double diff = grid.p(a) - grid.p(b);
      p_double(a, b) = (diff * diff) * rho_p(a, b);
      p_anti(a, b) = (grid.p(a) + grid.p(b)) * rho_p(a, b);
    }
  }
  const ComplexMatrix pp = to_position(p_double);
  const ComplexMatrix anti = to_position(p_anti);

  const Complex friction(0.0, -lb * ab);
  ComplexMatrix out(n, n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) {
      const double d = grid.wrapped_separation(j, k);
      out(j, k) = -0.5 * lb * d * d * rho(j, k) - 0.5 * lb * ab * ab * pp(j, k) +
                  friction * d * anti(j, k);
    }
  }
  return out;
}

}  // namespace

TransferKernel::TransferKernel(double dq, int k_max, std::vector<double> weights)
    : dq_(dq), k_max_(k_max), weights_(std::move(weights)) {
  require_positive(dq, "transfer kernel dq");
  if (k_max < 0) throw std::invalid_argument("transfer kernel k_max must be >= 0");
  if (weights_.size() != static_cast<std::size_t>(2 * k_max + 1)) {
    throw std::invalid_argument(fmt::format("transfer kernel needs {} weights, got {}",
                                            2 * k_max + 1, weights_.size()));
  }
  for (std::size_t i = 0; i < weights_.size(); ++i) {
    if (!std::isfinite(weights_[i]) || weights_[i] < 0.0) {
      throw std::invalid_argument(fmt::format("transfer kernel weight at k = {} is {}",
                                              static_cast<long>(i) - k_max, weights_[i]));
    }
  }
}

double TransferKernel::weight(int k) const {
  if (k < -k_max_ || k > k_max_) return 0.0;
  return weights_[static_cast<std::size_t>(k + k_max_)];
}

double TransferKernel::total() const {
  double s = 0.0;
  for (double w : weights_) s += w;
  return s;
}

double TransferKernel::second_moment() const {
  double s = 0.0;
  for (int k = -k_max_; k <= k_max_; ++k) s += weight(k) * q(k) * q(k);
  return s;
}

Complex TransferKernel::fourier_sum(double s) const {
  double re = weight(0), im = 0.0;
  for (int k = 1; k <= k_max_; ++k) {
    const double theta = q(k) * s;
    re += (weight(k) + weight(-k)) * std::cos(theta);
    im += (weight(k) - weight(-k)) * std::sin(theta);
  }
  return {re, im};
}

MomentumTransferDistribution::MomentumTransferDistribution(TransferKernel kernel)
    : kernel_(std::move(kernel)) {
  const double total = kernel_.total();
  if (!(total > 0.0)) throw std::invalid_argument("momentum transfer distribution has zero mass");
  std::vector<double> w = kernel_.weights();
  for (double& v : w) v /= total;
  kernel_ = TransferKernel(kernel_.dq(), kernel_.k_max(), std::move(w));
}

int gaussian_k_max(const Grid& grid, double alpha) {
  require_positive(alpha, "alpha");
  const double sd = std::sqrt(0.5 * alpha);
  return static_cast<int>(std::ceil(10.0 * sd / grid.dq()));
}

MomentumTransferDistribution gaussian_transfer_distribution(const Grid& grid, double alpha,
                                                            int k_max) {
  require_positive(alpha, "alpha");
  const double sd = std::sqrt(0.5 * alpha);
  if (k_max < 0 || k_max * grid.dq() < 8.0 * sd) {
    throw std::invalid_argument(fmt::format(
        "k_max = {} covers {:.3g} standard deviations; at least 8 are required", k_max,
        std::max(k_max, 0) * grid.dq() / sd));
  }
  std::vector<double> w(2 * k_max + 1);
  for (int k = -k_max; k <= k_max; ++k) {
    const double q = k * grid.dq();
    w[k + k_max] = std::exp(-q * q / alpha);
  }
  return MomentumTransferDistribution(TransferKernel(grid.dq(), k_max, std::move(w)));
}

MomentumTransferDistribution two_point_distribution(const Grid& grid, int k) {
  const int k_max = std::abs(k);
  std::vector<double> w(2 * k_max + 1, 0.0);
  w[k_max + k] += 0.5;
  w[k_max - k] += 0.5;
  return MomentumTransferDistribution(TransferKernel(grid.dq(), k_max, std::move(w)));
}

Complex characteristic_function(const MomentumTransferDistribution& dist, double s) {
  return dist.kernel().fourier_sum(s);
}

double dynamic_structure_factor(double q, double energy, double gas_mass, double beta) {
  if (q == 0.0 || !std::isfinite(q)) {
    throw std::invalid_argument("dynamic structure factor is singular at q = 0");
  }
  require_positive(gas_mass, "gas mass");
  require_positive(beta, "beta");
  const double u = 2.0 * gas_mass * energy + q * q;
  return std::sqrt(beta * gas_mass / kTwoPi) / std::abs(q) *
         std::exp(-beta / (8.0 * gas_mass) * u * u / (q * q));
}

double energy_transfer(double q, double p, double test_mass, EnergyTransfer convention) {
  const double cross = convention == EnergyTransfer::Recoil ? p * q / test_mass
                                                            : p * q / (2.0 * test_mass);
  return q * q / (2.0 * test_mass) + cross;
}

const char* to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Grw: return "GRW";
    case GeneratorKind::MomentumTransfer: return "MomentumTransfer";
    case GeneratorKind::CollisionalZeroEnergy: return "CollisionalZeroE";
    case GeneratorKind::LinearBoltzmann: return "LinearBoltzmann";
    case GeneratorKind::DissipativeQbm: return "DissipativeQBM";
  }
  return "unknown";
}

GeneratorSpec::GeneratorSpec(Grid grid, detail::Model model)
    : grid_(std::move(grid)), model_(std::move(model)) {}

GeneratorKind GeneratorSpec::kind() const {
  return std::visit(Overloaded{
                        [](const detail::GrwModel&) { return GeneratorKind::Grw; },
                        [](const detail::MomentumTransferModel&) {
                          return GeneratorKind::MomentumTransfer;
                        },
                        [](const detail::CollisionalModel&) {
                          return GeneratorKind::CollisionalZeroEnergy;
                        },
                        [](const detail::LinearBoltzmannModel&) {
                          return GeneratorKind::LinearBoltzmann;
                        },
                        [](const detail::QbmModel&) { return GeneratorKind::DissipativeQbm; },
                    },
                    model_);
}

bool GeneratorSpec::is_c_number() const {
  const GeneratorKind k = kind();
  return k == GeneratorKind::Grw || k == GeneratorKind::MomentumTransfer ||
         k == GeneratorKind::CollisionalZeroEnergy;
}

const std::vector<Complex>& GeneratorSpec::offset_multiplier() const {
  if (const auto* m = std::get_if<detail::GrwModel>(&model_)) return m->closed_form.values;
  if (const auto* m = std::get_if<detail::MomentumTransferModel>(&model_)) {
    return m->multiplier.values;
  }
  if (const auto* m = std::get_if<detail::CollisionalModel>(&model_)) return m->multiplier.values;
  throw std::invalid_argument(
      fmt::format("{} generator has no element-wise multiplier", to_string(kind())));
}

GeneratorSpec grw_generator(const Grid& grid, const GrwParams& params) {
  require_finite_nonnegative(params.lambda, "GRW lambda");
  require_positive(params.alpha, "GRW alpha");
  const double lambda = params.lambda;
  const double alpha = params.alpha;
  detail::OffsetMultiplier closed = offset_table(grid.n_points(), [&](int d) {
    const double s = grid.wrap_offset(d) * grid.dx();
    return Complex(lambda * std::expm1(-0.25 * alpha * s * s), 0.0);
  });
  MomentumTransferDistribution dist =
      gaussian_transfer_distribution(grid, alpha, gaussian_k_max(grid, alpha));
  detail::OffsetMultiplier lattice = depletion_table(grid, dist.kernel(), lambda);
  return GeneratorSpec(grid, detail::GrwModel{params, std::move(closed), std::move(lattice),
                                              std::move(dist)});
}

GeneratorSpec momentum_transfer_generator(const Grid& grid, double lambda,
                                          const MomentumTransferDistribution& dist) {
  require_finite_nonnegative(lambda, "lambda");
  require_matching_dq(grid, dist.dq());
  detail::OffsetMultiplier table = depletion_table(grid, dist.kernel(), lambda);
  return GeneratorSpec(grid, detail::MomentumTransferModel{lambda, dist, std::move(table)});
}

GeneratorSpec collisional_zero_energy_generator(const Grid& grid, const TransferKernel& kernel) {
  require_matching_dq(grid, kernel.dq());
  detail::OffsetMultiplier table = depletion_table(grid, kernel, 1.0);
  return GeneratorSpec(grid, detail::CollisionalModel{kernel, std::move(table)});
}

GeneratorSpec linear_boltzmann_generator(const Grid& grid, const TransferKernel& kernel,
                                         double test_mass, double gas_mass, double beta,
                                         LinearBoltzmannOptions options) {
  require_matching_dq(grid, kernel.dq());
  require_positive(test_mass, "test mass");
  require_positive(gas_mass, "gas mass");
  require_positive(beta, "beta");
  if (kernel.weight(0) != 0.0) {
    throw std::invalid_argument("linear Boltzmann kernel must vanish at q = 0");
  }
  const int n = grid.n_points();
  if (kernel.k_max() >= n / 2) {
    throw std::invalid_argument(fmt::format(
        "linear Boltzmann kernel k_max = {} must stay below n/2 = {}", kernel.k_max(), n / 2));
  }

  detail::LinearBoltzmannModel model{kernel, test_mass, gas_mass, beta, options, {}, {}, {}, {}};
  model.loss.assign(n, 0.0);
  for (int k = -kernel.k_max(); k <= kernel.k_max(); ++k) {
    const double w = kernel.weight(k);
    if (w == 0.0) continue;
    const double q = kernel.q(k);
    std::vector<double> root(n);
    for (int a = 0; a < n; ++a) {
      const double e = options.zero_energy_transfer
                           ? 0.0
                           : energy_transfer(q, grid.p(a), test_mass, options.energy);
      const double s = dynamic_structure_factor(q, e, gas_mass, beta);
      root[a] = std::sqrt(s);
      model.loss[a] += w * s;
    }
    model.steps.push_back(k);
    model.weights.push_back(w);
    model.sqrt_rate.push_back(std::move(root));
  }
  return GeneratorSpec(grid, std::move(model));
}

GeneratorSpec qbm_generator(const Grid& grid, const QbmParams& params) {
  require_finite_nonnegative(params.lambda_bar, "lambda_bar");
  require_positive(params.alpha_bar, "alpha_bar");
  return GeneratorSpec(grid, detail::QbmModel{params});
}

QbmParams mass_scaled_params(double m, double m0, double lambda0, double alpha0) {
  require_positive(m, "mass");
  require_positive(m0, "reference mass");
  require_positive(lambda0, "lambda0");
  require_positive(alpha0, "alpha0");
  return {m / m0 * lambda0, m0 / m * alpha0};
}

ComplexMatrix apply_generator(const GeneratorSpec& spec, const ComplexMatrix& rho,
                    const ApplyOptions& options) {
  require_size(spec, rho);
  const Grid& grid = spec.grid();
  const bool boosts = options.path == CNumberPath::BoostSum;
  return std::visit(
      Overloaded{
          [&](const detail::GrwModel& m) -> ComplexMatrix {
            if (boosts) return m.params.lambda * boost_sum(grid, m.distribution.kernel(), rho);
            return apply_multiplier(m.closed_form.values, rho);
          },
          [&](const detail::MomentumTransferModel& m) -> ComplexMatrix {
            if (boosts) return m.lambda * boost_sum(grid, m.distribution.kernel(), rho);
            return apply_multiplier(m.multiplier.values, rho);
          },
          [&](const detail::CollisionalModel& m) -> ComplexMatrix {
            if (boosts) return boost_sum(grid, m.kernel, rho);
            return apply_multiplier(m.multiplier.values, rho);
          },
          [&](const detail::LinearBoltzmannModel&) -> ComplexMatrix {
            return hermitian_part(detail::apply_linear(spec, rho));
          },
          [&](const detail::QbmModel&) -> ComplexMatrix {
            // At offset n/2 the minimum image is ambiguous; the Hermitian
            // part drops the friction term there.
            return hermitian_part(detail::apply_linear(spec, rho));
          },
      },
      spec.model());
}

ComplexMatrix detail::apply_linear(const GeneratorSpec& spec, const ComplexMatrix& rho) {
  require_size(spec, rho);
  const Grid& grid = spec.grid();
  return std::visit(
      Overloaded{
          [&](const detail::LinearBoltzmannModel& m) -> ComplexMatrix {
            return apply_linear_boltzmann(grid, m, rho);
          },
          [&](const detail::QbmModel& m) -> ComplexMatrix {
            return apply_qbm(grid, m.params, rho);
          },
          [&](const auto&) -> ComplexMatrix {
            return apply_multiplier(spec.offset_multiplier(), rho);
          },
      },
      spec.model());
}

ComplexMatrix apply_generator(const GeneratorSpec& spec, const DensityMatrix& rho,
                    const ApplyOptions& options) {
  if (rho.representation() == Representation::Momentum) {
    return apply_generator(spec, to_position(rho.matrix()), options);
  }
  return apply_generator(spec, rho.matrix(), options);
}

double rate_bound(const GeneratorSpec& spec) {
  const Grid& grid = spec.grid();
  return std::visit(
      Overloaded{
          [&](const detail::LinearBoltzmannModel& m) {
            // Gain and loss each bounded by sum_q w(q) max_p S.
            double s = 0.0;
            for (std::size_t i = 0; i < m.steps.size(); ++i) {
              const double peak = dynamic_structure_factor(m.kernel.q(m.steps[i]),
                                                           -0.5 * m.kernel.q(m.steps[i]) *
                                                               m.kernel.q(m.steps[i]) / m.gas_mass,
                                                           m.gas_mass, m.beta);
              s += m.weights[i] * peak;
            }
            return 2.0 * s;
          },
          [&](const detail::QbmModel& m) {
            const double lb = m.params.lambda_bar, ab = m.params.alpha_bar;
            const double d = 0.5 * grid.length();
            const double dp = 2.0 * grid.p_max();
            return 0.5 * lb * d * d + 0.5 * lb * ab * ab * dp * dp + lb * ab * d * dp;
          },
          [&](const auto&) {
            double peak = 0.0;
            for (const Complex& v : spec.offset_multiplier()) peak = std::max(peak, std::abs(v));
            return peak;
          },
      },
      spec.model());
}

double effective_rate(const GeneratorSpec& spec) {
  return std::visit(
      Overloaded{
          [](const detail::GrwModel& m) { return m.params.lambda; },
          [](const detail::MomentumTransferModel& m) { return m.lambda; },
          [](const detail::CollisionalModel& m) { return m.kernel.total(); },
          [&](const detail::LinearBoltzmannModel& m) {
            return m.loss[static_cast<std::size_t>(spec.grid().zero_momentum_index())];
          },
          [](const detail::QbmModel&) { return 0.0; },
      },
      spec.model());
}

double check_translation_covariance(const Superoperator& generator, const ComplexMatrix& rho,
                                    int steps) {
  const ComplexMatrix lhs = generator(position_shift(rho, steps));
  const ComplexMatrix rhs = position_shift(generator(rho), steps);
  return (lhs - rhs).cwiseAbs().maxCoeff();
}

double check_translation_covariance(const GeneratorSpec& spec, const DensityMatrix& rho,
                                    int steps) {
  const ComplexMatrix rho_x = rho.representation() == Representation::Position
                                  ? rho.matrix()
                                  : to_position(rho.matrix());
  return check_translation_covariance(
      [&spec](const ComplexMatrix& m) { return apply_generator(spec, m); }, rho_x, steps);
}

}  // namespace tcme
