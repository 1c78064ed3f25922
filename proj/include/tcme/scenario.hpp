#pragma once

// Config-driven scenario runner behind the tcme command-line tool.
//
// Config files are INI: [section] headers and key = value lines. Grid, state
// and generator keys are in lattice units (hbar = 1); [gas] and [grw_si]
// keys are SI. See README.md for the key list.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

#include "tcme/evolve.hpp"
#include "tcme/generators.hpp"
#include "tcme/params.hpp"

namespace tcme {

/// Malformed or out-of-range configuration. line() is 0 when the problem is
/// not tied to one line (for example a missing key).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, int line, const std::string& field, const std::string& what);
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  int line_;
  std::string field_;
};

enum class ScenarioKind {
  FreeGrw,
  PureDissipator,
  DissipativeQbm,
  LinearBoltzmann,
  TwoParticleAmplification,
  CovarianceCheck,
  ParamsReport,
  EquivalenceCheck,
};

const char* to_string(ScenarioKind kind);
std::optional<ScenarioKind> parse_scenario_kind(const std::string& name);

struct GeneratorSettings {
  std::string kind;  // grw | momentum_transfer | collisional | linear_boltzmann | qbm
  double lambda = 0.0;
  double alpha = 0.0;
  std::string distribution;  // gaussian | two_point
  double transfer_alpha = 0.0;
  int transfer_step = 0;
  int k_max = 0;  // 0: automatic for gaussian transfer distributions
  std::string kernel;  // linear | gaussian
  double kappa = 0.0;
  double rate = 0.0;
  double width = 0.0;
  double test_mass = 1.0;
  double gas_mass = 1.0;
  double beta = 1.0;
  EnergyTransfer energy = EnergyTransfer::Recoil;
  bool zero_energy_transfer = false;
  double lambda_bar = 0.0;
  double alpha_bar = 0.0;
  double reference_mass = 1.0;  // m0 of the mass-scaling rule
};

struct StateSettings {
  std::string kind;  // gaussian | cat | thermal | plane_wave | mixed | snapshot
  double x0 = 0.0;
  double x0_second = 0.0;
  double p0 = 0.0;
  double sigma = 1.0;
  double separation = 0.0;
  double p2 = 0.0;
  int momentum_index = 0;
  std::string snapshot;
};

struct EvolutionSettings {
  double dt = 1e-3;
  double t_final = 1.0;
  double mass = 1.0;
  bool free_hamiltonian = false;
  int record_every = 1;
  std::vector<CoherenceSite> coherence;
  std::string snapshots = "final";  // none | final
};

struct CheckSettings {
  double tolerance = 0.0;  // 0: scenario default
  int n_states = 50;
  unsigned long seed = 1;
  std::vector<int> shifts;
  int samples = 100;
  double equilibrium_tolerance = 0.1;
  double particle_mass = 1.0;
};

struct ScenarioConfig {
  std::string source;  // path the config was read from
  ScenarioKind kind = ScenarioKind::PureDissipator;
  bool reproducible = true;
  std::string output_dir;
  int n_points = 64;
  double length = 32.0;
  GeneratorSettings generator;
  StateSettings state;
  EvolutionSettings evolution;
  CheckSettings checks;
  GasParams gas{};
  GrwSi grw_si{};
  /// Every value the run uses, defaults included; written back out as
  /// resolved.ini so the run can be repeated from the output directory.
  boost::property_tree::ptree resolved;
};

/// Parses and validates; throws ConfigError. `kind_override` replaces
/// [scenario] kind (used by `verify --suite`).
ScenarioConfig load_config(const std::string& path,
                           std::optional<ScenarioKind> kind_override = std::nullopt);

struct CheckResult {
  std::string name;
  double measured;
  double tolerance;
  std::string relation;  // "<=", ">=" or "info"
  bool pass;
};

struct ScenarioResult {
  std::vector<CheckResult> checks;
  std::vector<std::string> outputs;
  bool passed() const;
  /// First failing check, for diagnostics.
  const CheckResult* first_failure() const;
};

/// Runs the scenario and writes manifest.json, resolved.ini, results.csv and
/// (for time evolutions) observables.csv and snapshots into out_dir.
/// Throws ConfigError if the settings are rejected while building the run and
/// NonFiniteState if the state blows up.
ScenarioResult run_scenario(const ScenarioConfig& cfg, const std::filesystem::path& out_dir);

/// Ginibre-distributed random density matrix, deterministic for a seed.
ComplexMatrix random_density_matrix(int n, unsigned long seed);

}  // namespace tcme
