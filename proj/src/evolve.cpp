#include "tcme/evolve.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

namespace tcme {
namespace {

class Derivative {
 public:
  Derivative(const GeneratorSpec& spec, const EvolutionConfig& cfg) : spec_(spec), cfg_(cfg) {
    if (cfg.include_free_hamiltonian) {
      const Grid& g = spec.grid();
      energy_.resize(g.n_points());
      for (int a = 0; a < g.n_points(); ++a) energy_[a] = g.p(a) * g.p(a) / (2.0 * cfg.mass);
    }
  }

  ComplexMatrix operator()(const ComplexMatrix& rho) const {
    ComplexMatrix out = apply_generator(spec_, rho);
    if (!energy_.empty()) out += hermitian_part(commutator_term(rho));
    return out;
  }

 private:
  // -i [H, rho] with H diagonal in momentum.
  ComplexMatrix commutator_term(const ComplexMatrix& rho) const {
    ComplexMatrix rho_p = to_momentum(rho);
    const int n = static_cast<int>(rho.rows());
    for (int b = 0; b < n; ++b)
      for (int a = 0; a < n; ++a) rho_p(a, b) *= Complex(0.0, -(energy_[a] - energy_[b]));
    return to_position(rho_p);
  }

  const GeneratorSpec& spec_;
  const EvolutionConfig& cfg_;
  std::vector<double> energy_;
};

long step_count(const EvolutionConfig& cfg) {
  if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) {
    throw std::invalid_argument(fmt::format("dt must be positive, got {}", cfg.dt));
  }
  if (!(cfg.t_final > 0.0) || !std::isfinite(cfg.t_final)) {
    throw std::invalid_argument(fmt::format("t_final must be positive, got {}", cfg.t_final));
  }
  if (cfg.dt > cfg.t_final) {
    throw std::invalid_argument(fmt::format("dt = {} exceeds t_final = {}", cfg.dt, cfg.t_final));
  }
  const double ratio = cfg.t_final / cfg.dt;
  const long n = std::lround(ratio);
  if (std::abs(ratio - static_cast<double>(n)) > 1e-9 * ratio) {
    throw std::invalid_argument(
        fmt::format("t_final = {} is not an integer number of steps dt = {}", cfg.t_final, cfg.dt));
  }
  return n;
}

}  // namespace

NonFiniteState::NonFiniteState(long step, double t)
    : std::runtime_error(fmt::format("state became non-finite at step {} (t = {})", step, t)),
      step_(step) {}

double TrajectoryRecord::max_trace_drift() const {
  return trace_drift.empty() ? 0.0 : *std::max_element(trace_drift.begin(), trace_drift.end());
}

double TrajectoryRecord::max_hermiticity_drift() const {
  return hermiticity_drift.empty()
             ? 0.0
             : *std::max_element(hermiticity_drift.begin(), hermiticity_drift.end());
}

double TrajectoryRecord::lowest_eigenvalue() const {
  return min_eigenvalue.empty() ? 0.0
                                : *std::min_element(min_eigenvalue.begin(), min_eigenvalue.end());
}

bool healthy(const TrajectoryRecord& record, const HealthLimits& limits) {
  return record.max_trace_drift() <= limits.trace &&
         record.max_hermiticity_drift() <= limits.hermiticity &&
         record.lowest_eigenvalue() >= limits.eigenvalue;
}

double stiffness(const GeneratorSpec& spec, const EvolutionConfig& cfg) {
  double s = rate_bound(spec);
  if (cfg.include_free_hamiltonian) {
    const double pm = spec.grid().p_max();
    s += pm * pm / (2.0 * cfg.mass);
  }
  return s;
}

TrajectoryRecord evolve(const DensityMatrix& rho0, const GeneratorSpec& spec,
                        const EvolutionConfig& cfg) {
  const long n_steps = step_count(cfg);
  if (cfg.record_every < 1) throw std::invalid_argument("record_every must be >= 1");
  if (!(cfg.mass > 0.0)) throw std::invalid_argument("mass must be positive");
  const double bound = cfg.dt * stiffness(spec, cfg);
  if (bound > 0.1) {
    throw std::invalid_argument(fmt::format(
        "step size dt = {} violates the stability bound: dt * stiffness = {:.4g} > 0.1", cfg.dt,
        bound));
  }
  if (rho0.size() != spec.grid().n_points()) {
    throw std::invalid_argument("initial state and generator live on different grids");
  }

  const Grid& grid = spec.grid();
  const Derivative derivative(spec, cfg);
  ComplexMatrix rho = rho0.representation() == Representation::Position
                          ? rho0.matrix()
                          : to_position(rho0.matrix());
  const Complex trace0 = rho.trace();
  // Compensated summation of the increments keeps round-off below the
  // truncation error even for very small dt.
  ComplexMatrix carry = ComplexMatrix::Zero(rho.rows(), rho.cols());

  TrajectoryRecord rec;
  rec.trace_drift.reserve(static_cast<std::size_t>(n_steps) + 1);
  rec.hermiticity_drift.reserve(static_cast<std::size_t>(n_steps) + 1);

  auto record = [&](long step) {
    const double t = static_cast<double>(step) * cfg.dt;
    rec.times.push_back(t);
    rec.observables.push_back(
        measure(DensityMatrix::trusted(rho), grid, cfg.mass, cfg.coherence_sites));
    rec.min_eigenvalue.push_back(min_eigenvalue(rho));
    if (cfg.observer) cfg.observer(t, rho);
  };
  auto diagnose = [&]() {
    rec.trace_drift.push_back(std::abs(rho.trace() - trace0));
    rec.hermiticity_drift.push_back(hermiticity_residual(rho));
  };

  diagnose();
  record(0);
  const double h = cfg.dt;
  for (long step = 1; step <= n_steps; ++step) {
    const ComplexMatrix k1 = derivative(rho);
    const ComplexMatrix k2 = derivative(rho + (0.5 * h) * k1);
    const ComplexMatrix k3 = derivative(rho + (0.5 * h) * k2);
    const ComplexMatrix k4 = derivative(rho + h * k3);
    const ComplexMatrix increment = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);

    const ComplexMatrix y = increment - carry;
    const ComplexMatrix sum = rho + y;
    carry = (sum - rho) - y;
    rho = sum;

    if (!rho.allFinite()) throw NonFiniteState(step, static_cast<double>(step) * h);
    if (cfg.renormalize_trace) rho /= rho.trace().real();
    diagnose();
    if (step % cfg.record_every == 0 || step == n_steps) record(step);
  }
  rec.final_state = std::move(rho);
  return rec;
}

double analytic_offdiagonal_factor(double lambda, double alpha, double s, double t) {
  if (t < 0.0) throw std::invalid_argument("analytic_offdiagonal_factor needs t >= 0");
  return std::exp(lambda * std::expm1(-0.25 * alpha * s * s) * t);
}

double qbm_second_moment_prediction(const QbmParams& params, double p2_0, double t) {
  if (t < 0.0) throw std::invalid_argument("qbm_second_moment_prediction needs t >= 0");
  const double asymptote = 1.0 / (4.0 * params.alpha_bar);
  return asymptote +
         (p2_0 - asymptote) * std::exp(-4.0 * params.lambda_bar * params.alpha_bar * t);
}

}  // namespace tcme
