#pragma once

// Fixed-step RK4 integration of d rho/dt = -i[H, rho] + L[rho] with
// H = p^2/2M (optional) and per-step state diagnostics.

#include <functional>
#include <stdexcept>
#include <vector>

#include "tcme/generators.hpp"
#include "tcme/states.hpp"

namespace tcme {

struct EvolutionConfig {
  double dt = 1e-3;
  double t_final = 1.0;
  double mass = 1.0;
  bool include_free_hamiltonian = false;
  int record_every = 1;
  bool renormalize_trace = false;
  std::vector<CoherenceSite> coherence_sites;
  /// Called with (t, position-representation rho) at every recorded step.
  std::function<void(double, const ComplexMatrix&)> observer;
};

struct TrajectoryRecord {
  std::vector<double> times;
  std::vector<ObservableSet> observables;
  // One entry per integration step (index 0 is the initial state).
  std::vector<double> trace_drift;
  std::vector<double> hermiticity_drift;
  // One entry per recorded time.
  std::vector<double> min_eigenvalue;
  ComplexMatrix final_state;

  double max_trace_drift() const;
  double max_hermiticity_drift() const;
  double lowest_eigenvalue() const;
};

struct HealthLimits {
  double trace = 1e-9;
  double hermiticity = 1e-10;
  double eigenvalue = -1e-8;
};

bool healthy(const TrajectoryRecord& record, const HealthLimits& limits = {});

/// Raised when the state stops being finite; carries the step index.
class NonFiniteState : public std::runtime_error {
 public:
  NonFiniteState(long step, double t);
  long step() const { return step_; }

 private:
  long step_;
};

/// Largest rate the step-size guard allows for: dt * stiffness <= 0.1.
double stiffness(const GeneratorSpec& spec, const EvolutionConfig& cfg);

/// Throws std::invalid_argument if dt, t_final or the stability bound are
/// violated, or if t_final is not an integer number of steps.
TrajectoryRecord evolve(const DensityMatrix& rho0, const GeneratorSpec& spec,
                        const EvolutionConfig& cfg);

/// exp(-lambda (1 - exp(-alpha s^2/4)) t)
double analytic_offdiagonal_factor(double lambda, double alpha, double s, double t);

/// 1/(4 alpha_bar) + (p2_0 - 1/(4 alpha_bar)) exp(-4 lambda_bar alpha_bar t)
double qbm_second_moment_prediction(const QbmParams& params, double p2_0, double t);

}  // namespace tcme
