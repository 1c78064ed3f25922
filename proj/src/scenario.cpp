#include "tcme/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/version.hpp>
#include <fftw3.h>
#include <fmt/format.h>
#include <json.hpp>

#include "tcme/multiparticle.hpp"
#include "tcme/snapshot.hpp"
#include "tcme/spectral.hpp"
#include "tcme/states.hpp"

#ifndef TCME_VERSION
#define TCME_VERSION "unknown"
#endif

namespace tcme {
namespace {

namespace pt = boost::property_tree;
namespace fs = std::filesystem;

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"scenario", {"kind", "reproducible", "output_dir"}},
    {"grid", {"n_points", "length"}},
    {"generator",
     {"kind", "lambda", "alpha", "distribution", "transfer_alpha", "transfer_step", "k_max",
      "kernel", "kappa", "rate", "width", "test_mass", "gas_mass", "beta", "energy_transfer",
      "zero_energy_transfer", "lambda_bar", "alpha_bar", "reference_mass"}},
    {"state",
     {"kind", "x0", "x0_second", "p0", "sigma", "separation", "p2", "momentum_index", "path"}},
    {"evolution",
     {"dt", "t_final", "mass", "free_hamiltonian", "record_every", "coherence", "snapshots"}},
    {"checks",
     {"tolerance", "n_states", "seed", "shifts", "samples", "equilibrium_tolerance",
      "particle_mass"}},
    {"gas", {"density", "gas_mass", "temperature", "beta", "coupling", "test_mass"}},
    {"grw_si", {"lambda", "alpha"}},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_number(double v) { return fmt::format("{:.17g}", v); }

// Reads typed values out of the parsed INI tree, remembers where every key
// was written, and echoes each value it hands out into `resolved`.
class Reader {
 public:
  explicit Reader(std::string path) : path_(std::move(path)) {
    std::ifstream in(path_);
    if (!in) throw ConfigError(path_, 0, "", "cannot open config file");
    std::stringstream text;
    text << in.rdbuf();
    try {
      pt::read_ini(text, tree_);
    } catch (const pt::ini_parser_error& e) {
      throw ConfigError(path_, static_cast<int>(e.line()), "", e.message());
    }
    index_lines(text.str());
    for (const auto& [section, body] : tree_) {
      const auto known = kKnownKeys.find(section);
      if (known == kKnownKeys.end()) {
        throw ConfigError(path_, line_of(section, ""), section, "unknown section");
      }
      if (!body.data().empty() && body.empty()) {
        throw ConfigError(path_, line_of("", section), section, "key outside any section");
      }
      for (const auto& [key, value] : body) {
        if (!known->second.count(key)) {
          throw ConfigError(path_, line_of(section, key), field(section, key), "unknown key");
        }
      }
    }
  }

  const std::string& path() const { return path_; }
  pt::ptree& resolved() { return resolved_; }

  void echo(const std::string& section, const std::string& key, const std::string& v) {
    resolved_.put(pt::ptree::path_type(section + '\0' + key, '\0'), v);
  }

  bool has(const std::string& section, const std::string& key) const {
    return raw(section, key).has_value();
  }

  [[noreturn]] void fail(const std::string& section, const std::string& key,
                         const std::string& what) const {
    throw ConfigError(path_, line_of(section, key), field(section, key), what);
  }

  std::string word(const std::string& section, const std::string& key,
                   const std::vector<std::string>& allowed,
                   std::optional<std::string> fallback = std::nullopt) {
    auto v = raw(section, key);
    if (!v) {
      if (!fallback) fail(section, key, "missing required key");
      v = *fallback;
    }
    if (!allowed.empty() && std::find(allowed.begin(), allowed.end(), *v) == allowed.end()) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      fail(section, key, fmt::format("'{}' is not one of: {}", *v, list));
    }
    echo(section, key, *v);
    return *v;
  }

  std::string text(const std::string& section, const std::string& key,
                   std::optional<std::string> fallback = std::nullopt) {
    return word(section, key, {}, std::move(fallback));
  }

  double number(const std::string& section, const std::string& key,
                std::optional<double> fallback = std::nullopt) {
    const auto v = raw(section, key);
    double out = 0.0;
    if (!v) {
      if (!fallback) fail(section, key, "missing required key");
      out = *fallback;
    } else {
      const char* b = v->data();
      const char* e = b + v->size();
      const auto [ptr, ec] = std::from_chars(b, e, out);
      if (ec != std::errc() || ptr != e || !std::isfinite(out)) {
        fail(section, key, fmt::format("'{}' is not a finite number", *v));
      }
    }
    echo(section, key, format_number(out));
    return out;
  }

  double positive(const std::string& section, const std::string& key,
                  std::optional<double> fallback = std::nullopt) {
    const double v = number(section, key, fallback);
    if (!(v > 0.0)) fail(section, key, fmt::format("must be > 0, got {}", v));
    return v;
  }

  long integer(const std::string& section, const std::string& key,
               std::optional<long> fallback = std::nullopt) {
    const auto v = raw(section, key);
    long out = 0;
    if (!v) {
      if (!fallback) fail(section, key, "missing required key");
      out = *fallback;
    } else {
      const char* b = v->data();
      const char* e = b + v->size();
      const auto [ptr, ec] = std::from_chars(b, e, out);
      if (ec != std::errc() || ptr != e) fail(section, key, fmt::format("'{}' is not an integer", *v));
    }
    echo(section, key, std::to_string(out));
    return out;
  }

  bool flag(const std::string& section, const std::string& key, bool fallback) {
    const std::string v = word(section, key, {"true", "false"}, fallback ? "true" : "false");
    return v == "true";
  }

  std::vector<long> integer_list(const std::string& section, const std::string& key,
                                 const std::string& fallback) {
    const std::string v = text(section, key, fallback);
    std::vector<long> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      long x = 0;
      const auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), x);
      if (ec != std::errc() || ptr != item.data() + item.size()) {
        fail(section, key, fmt::format("'{}' is not an integer", item));
      }
      out.push_back(x);
    }
    return out;
  }

  std::vector<CoherenceSite> site_list(const std::string& section, const std::string& key) {
    const std::string v = text(section, key, "");
    std::vector<CoherenceSite> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
      item = trim(item);
      if (item.empty()) continue;
      const auto colon = item.find(':');
      int row = 0, col = 0;
      bool ok = colon != std::string::npos;
      if (ok) {
        const std::string a = trim(item.substr(0, colon));
        const std::string b = trim(item.substr(colon + 1));
        ok = std::from_chars(a.data(), a.data() + a.size(), row).ptr == a.data() + a.size() &&
             std::from_chars(b.data(), b.data() + b.size(), col).ptr == b.data() + b.size() &&
             !a.empty() && !b.empty();
      }
      if (!ok) fail(section, key, fmt::format("'{}' is not a row:col index pair", item));
      out.push_back({row, col});
    }
    return out;
  }

  int line_of(const std::string& section, const std::string& key) const {
    const auto it = lines_.find({section, key});
    if (it != lines_.end()) return it->second;
    if (!key.empty()) return line_of(section, "");
    return 0;
  }

 private:
  static std::string field(const std::string& section, const std::string& key) {
    return key.empty() ? fmt::format("[{}]", section) : fmt::format("[{}] {}", section, key);
  }

  std::optional<std::string> raw(const std::string& section, const std::string& key) const {
    const auto sec = tree_.get_child_optional(pt::ptree::path_type(section, '\0'));
    if (!sec) return std::nullopt;
    const auto v = sec->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return trim(*v);
  }

  void index_lines(const std::string& text) {
    std::stringstream ss(text);
    std::string line, section;
    for (int n = 1; std::getline(ss, line); ++n) {
      line = trim(line);
      if (line.empty() || line[0] == ';' || line[0] == '#') continue;
      if (line.front() == '[' && line.back() == ']') {
        section = trim(line.substr(1, line.size() - 2));
        lines_.emplace(std::make_pair(section, std::string()), n);
      } else if (const auto eq = line.find('='); eq != std::string::npos) {
        lines_.emplace(std::make_pair(section, trim(line.substr(0, eq))), n);
      }
    }
  }

  std::string path_;
  pt::ptree tree_;
  pt::ptree resolved_;
  std::map<std::pair<std::string, std::string>, int> lines_;
};

bool evolves(ScenarioKind k) {
  return k == ScenarioKind::FreeGrw || k == ScenarioKind::PureDissipator ||
         k == ScenarioKind::DissipativeQbm || k == ScenarioKind::LinearBoltzmann;
}

bool uses_grid(ScenarioKind k) {
  return k != ScenarioKind::ParamsReport && k != ScenarioKind::EquivalenceCheck;
}

void read_generator(Reader& r, ScenarioConfig& cfg) {
  GeneratorSettings& g = cfg.generator;
  const std::string s = "generator";
  std::vector<std::string> allowed;
  std::optional<std::string> fallback;
  switch (cfg.kind) {
    case ScenarioKind::FreeGrw:
      allowed = {"grw"};
      fallback = "grw";
      break;
    case ScenarioKind::DissipativeQbm:
      allowed = {"qbm"};
      fallback = "qbm";
      break;
    case ScenarioKind::LinearBoltzmann:
      allowed = {"linear_boltzmann"};
      fallback = "linear_boltzmann";
      break;
    case ScenarioKind::TwoParticleAmplification:
      allowed = {"grw", "momentum_transfer", "qbm"};
      break;
    default:
      allowed = {"grw", "momentum_transfer", "collisional", "linear_boltzmann", "qbm"};
  }
  g.kind = r.word(s, "kind", allowed, fallback);

  auto read_kernel = [&] {
    g.kernel = r.word(s, "kernel", {"linear", "gaussian"});
    if (g.kernel == "linear") {
      g.kappa = r.positive(s, "kappa");
      g.k_max = static_cast<int>(r.integer(s, "k_max"));
      if (g.k_max < 1) r.fail(s, "k_max", "must be >= 1");
    } else {
      g.rate = r.positive(s, "rate");
      g.width = r.positive(s, "width");
      g.k_max = static_cast<int>(r.integer(s, "k_max", 0));
      if (g.k_max < 0) r.fail(s, "k_max", "must be >= 0 (0 picks it automatically)");
    }
  };

  if (g.kind == "grw") {
    g.lambda = r.positive(s, "lambda");
    g.alpha = r.positive(s, "alpha");
  } else if (g.kind == "momentum_transfer") {
    g.lambda = r.positive(s, "lambda");
    g.distribution = r.word(s, "distribution", {"gaussian", "two_point"});
    if (g.distribution == "gaussian") {
      g.transfer_alpha = r.positive(s, "transfer_alpha");
      g.k_max = static_cast<int>(r.integer(s, "k_max", 0));
      if (g.k_max < 0) r.fail(s, "k_max", "must be >= 0 (0 picks it automatically)");
    } else {
      g.transfer_step = static_cast<int>(r.integer(s, "transfer_step"));
      if (g.transfer_step < 1) r.fail(s, "transfer_step", "must be >= 1");
    }
  } else if (g.kind == "collisional") {
    read_kernel();
  } else if (g.kind == "linear_boltzmann") {
    read_kernel();
    g.test_mass = r.positive(s, "test_mass");
    g.gas_mass = r.positive(s, "gas_mass");
    g.beta = r.positive(s, "beta");
    g.energy = r.word(s, "energy_transfer", {"recoil", "half_cross_term"}, "recoil") == "recoil"
                   ? EnergyTransfer::Recoil
                   : EnergyTransfer::HalfCrossTerm;
    g.zero_energy_transfer = r.flag(s, "zero_energy_transfer", false);
  } else {
    g.lambda_bar = r.positive(s, "lambda_bar");
    g.alpha_bar = r.positive(s, "alpha_bar");
    if (cfg.kind == ScenarioKind::TwoParticleAmplification) {
      g.reference_mass = r.positive(s, "reference_mass", 1.0);
    }
  }
}

void read_state(Reader& r, ScenarioConfig& cfg) {
  StateSettings& st = cfg.state;
  const std::string s = "state";
  if (cfg.kind == ScenarioKind::TwoParticleAmplification) {
    st.kind = r.word(s, "kind", {"gaussian"}, "gaussian");
    st.sigma = r.positive(s, "sigma");
    st.x0 = r.number(s, "x0", 0.0);
    st.x0_second = r.number(s, "x0_second", 0.0);
    st.p0 = r.number(s, "p0", 0.0);
    return;
  }
  st.kind = r.word(s, "kind", {"gaussian", "cat", "thermal", "plane_wave", "mixed", "snapshot"});
  if (st.kind == "gaussian") {
    st.x0 = r.number(s, "x0", 0.0);
    st.p0 = r.number(s, "p0", 0.0);
    st.sigma = r.positive(s, "sigma");
  } else if (st.kind == "cat") {
    st.separation = r.positive(s, "separation");
    st.sigma = r.positive(s, "sigma");
  } else if (st.kind == "thermal") {
    st.p2 = r.positive(s, "p2");
  } else if (st.kind == "plane_wave") {
    st.momentum_index = static_cast<int>(r.integer(s, "momentum_index"));
  } else if (st.kind == "snapshot") {
    st.snapshot = r.text(s, "path");
    if (st.snapshot.empty()) r.fail(s, "path", "must not be empty");
    // relative paths are taken relative to the config file
    if (fs::path(st.snapshot).is_relative()) {
      st.snapshot = fs::absolute(fs::path(r.path()).parent_path() / st.snapshot).string();
      r.echo(s, "path", st.snapshot);
    }
  }
}

void read_evolution(Reader& r, ScenarioConfig& cfg) {
  EvolutionSettings& ev = cfg.evolution;
  const std::string s = "evolution";
  ev.dt = r.positive(s, "dt");
  ev.t_final = r.positive(s, "t_final");
  const double default_mass =
      cfg.generator.kind == "linear_boltzmann" ? cfg.generator.test_mass : 1.0;
  ev.mass = r.positive(s, "mass", default_mass);
  const bool h_default = cfg.kind != ScenarioKind::PureDissipator;
  ev.free_hamiltonian = r.flag(s, "free_hamiltonian", h_default);
  if (cfg.kind == ScenarioKind::PureDissipator && ev.free_hamiltonian) {
    r.fail(s, "free_hamiltonian", "pure_dissipator runs without the free Hamiltonian");
  }
  if (cfg.kind == ScenarioKind::FreeGrw && !ev.free_hamiltonian) {
    r.fail(s, "free_hamiltonian", "free_grw needs the free Hamiltonian");
  }
  ev.record_every = static_cast<int>(r.integer(s, "record_every", 1));
  if (ev.record_every < 1) r.fail(s, "record_every", "must be >= 1");
  ev.coherence = r.site_list(s, "coherence");
  for (const auto& site : ev.coherence) {
    if (site.row < 0 || site.row >= cfg.n_points || site.col < 0 || site.col >= cfg.n_points) {
      r.fail(s, "coherence", fmt::format("site {}:{} lies outside the grid", site.row, site.col));
    }
  }
  ev.snapshots = r.word(s, "snapshots", {"none", "final"}, "final");
}

void read_checks(Reader& r, ScenarioConfig& cfg) {
  CheckSettings& c = cfg.checks;
  const std::string s = "checks";
  double tol = 0.0;
  switch (cfg.kind) {
    case ScenarioKind::FreeGrw: tol = 5e-3; break;
    case ScenarioKind::PureDissipator: tol = 1e-8; break;
    case ScenarioKind::DissipativeQbm: tol = 1e-4; break;
    case ScenarioKind::LinearBoltzmann: tol = 1e-11; break;
    case ScenarioKind::TwoParticleAmplification:
      tol = cfg.generator.kind == "qbm" ? 1e-6 : 1e-11;
      break;
    case ScenarioKind::CovarianceCheck: tol = 1e-11; break;
    case ScenarioKind::EquivalenceCheck: tol = 1e-10; break;
    case ScenarioKind::ParamsReport: return;
  }
  c.tolerance = r.positive(s, "tolerance", tol);
  if (cfg.kind == ScenarioKind::CovarianceCheck) {
    c.n_states = static_cast<int>(r.integer(s, "n_states", 50));
    if (c.n_states < 1) r.fail(s, "n_states", "must be >= 1");
    const long seed = r.integer(s, "seed", 1);
    if (seed < 0) r.fail(s, "seed", "must be >= 0");
    c.seed = static_cast<unsigned long>(seed);
    const std::string fallback = fmt::format("1, 5, {}", cfg.n_points / 2 - 1);
    for (long v : r.integer_list(s, "shifts", fallback)) c.shifts.push_back(static_cast<int>(v));
    if (c.shifts.empty()) r.fail(s, "shifts", "needs at least one shift");
  }
  if (cfg.kind == ScenarioKind::EquivalenceCheck) {
    c.samples = static_cast<int>(r.integer(s, "samples", 100));
    if (c.samples < 2) r.fail(s, "samples", "must be >= 2");
  }
  if (cfg.kind == ScenarioKind::LinearBoltzmann) {
    c.equilibrium_tolerance = r.positive(s, "equilibrium_tolerance", 0.1);
  }
  if (cfg.kind == ScenarioKind::TwoParticleAmplification && cfg.generator.kind == "qbm") {
    c.particle_mass = r.positive(s, "particle_mass", 1.0);
  }
}

void read_gas(Reader& r, ScenarioConfig& cfg) {
  const std::string s = "gas";
  cfg.gas.density = r.positive(s, "density");
  cfg.gas.gas_mass = r.positive(s, "gas_mass");
  if (r.has(s, "temperature") == r.has(s, "beta")) {
    r.fail(s, r.has(s, "beta") ? "beta" : "temperature", "give exactly one of temperature, beta");
  }
  if (r.has(s, "temperature")) {
    cfg.gas.beta = 1.0 / (kCodata2018.boltzmann * r.positive(s, "temperature"));
  } else {
    cfg.gas.beta = r.positive(s, "beta");
  }
  cfg.gas.coupling = r.number(s, "coupling");
  if (cfg.gas.coupling < 0.0) r.fail(s, "coupling", "must be >= 0");
  cfg.gas.test_mass = r.positive(s, "test_mass");
  if (cfg.kind == ScenarioKind::ParamsReport) {
    cfg.grw_si.lambda = r.positive("grw_si", "lambda");
    cfg.grw_si.alpha = r.positive("grw_si", "alpha");
  }
}

// ---------------------------------------------------------------------------
// Building the run

template <typename F>
auto build(const ScenarioConfig& cfg, const char* section, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(cfg.source, 0, fmt::format("[{}]", section), e.what());
  } catch (const UnsupportedConfiguration& e) {
    throw ConfigError(cfg.source, 0, fmt::format("[{}]", section), e.what());
  }
}

TransferKernel make_kernel(const Grid& grid, const GeneratorSettings& g, bool exclude_zero) {
  int k_max = g.k_max;
  if (g.kernel == "gaussian" && k_max == 0) {
    k_max = std::min(gaussian_k_max(grid, g.width), grid.n_points() / 2 - 1);
  }
  std::vector<double> w(2 * k_max + 1, 0.0);
  double norm = 0.0;
  for (int k = -k_max; k <= k_max; ++k) {
    if (k == 0 && exclude_zero) continue;
    const double q = k * grid.dq();
    double v = g.kernel == "linear" ? g.kappa * std::abs(q) : std::exp(-q * q / g.width);
    w[k + k_max] = v;
    norm += v;
  }
  if (g.kernel == "gaussian") {
    for (double& v : w) v *= g.rate / norm;
  }
  return TransferKernel(grid.dq(), k_max, std::move(w));
}

MomentumTransferDistribution make_distribution(const Grid& grid, const GeneratorSettings& g) {
  if (g.distribution == "two_point") return two_point_distribution(grid, g.transfer_step);
  const int k_max = g.k_max > 0 ? g.k_max : gaussian_k_max(grid, g.transfer_alpha);
  return gaussian_transfer_distribution(grid, g.transfer_alpha, k_max);
}

GeneratorSpec make_generator(const Grid& grid, const GeneratorSettings& g) {
  if (g.kind == "grw") return grw_generator(grid, {g.lambda, g.alpha});
  if (g.kind == "momentum_transfer") {
    return momentum_transfer_generator(grid, g.lambda, make_distribution(grid, g));
  }
  if (g.kind == "collisional") {
    return collisional_zero_energy_generator(grid, make_kernel(grid, g, false));
  }
  if (g.kind == "linear_boltzmann") {
    return linear_boltzmann_generator(grid, make_kernel(grid, g, true), g.test_mass, g.gas_mass,
                                      g.beta, {g.energy, g.zero_energy_transfer});
  }
  return qbm_generator(grid, {g.lambda_bar, g.alpha_bar});
}

DensityMatrix make_state(const Grid& grid, const StateSettings& st) {
  if (st.kind == "gaussian") return gaussian_packet(grid, st.x0, st.p0, st.sigma);
  if (st.kind == "cat") return cat_state(grid, st.separation, st.sigma);
  if (st.kind == "thermal") return thermal_momentum_state(grid, st.p2);
  if (st.kind == "plane_wave") return plane_wave(grid, st.momentum_index);
  if (st.kind == "mixed") return maximally_mixed(grid);
  DensityMatrix rho = load_snapshot(st.snapshot);
  if (rho.size() != grid.n_points()) {
    throw std::invalid_argument(fmt::format("snapshot has {} points, grid has {}", rho.size(),
                                            grid.n_points()));
  }
  if (rho.representation() == Representation::Momentum) rho = to_position_representation(rho);
  return rho;
}

// ---------------------------------------------------------------------------
// Output

struct Column {
  std::string name;
  std::vector<double> values;
};

void write_observables(const fs::path& file, const TrajectoryRecord& rec,
                       const std::vector<Column>& extras) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", file.string()));
  out << "t,trace_re,trace_im,purity,mean_x,mean_p,var_x,p2,energy";
  const std::size_t n_coh =
      rec.observables.empty() ? 0 : rec.observables.front().coherence_samples.size();
  for (std::size_t i = 0; i < n_coh; ++i) out << fmt::format(",coh_{}_re,coh_{}_im", i, i);
  for (const auto& c : extras) out << ',' << c.name;
  out << '\n';
  for (std::size_t r = 0; r < rec.times.size(); ++r) {
    const ObservableSet& o = rec.observables[r];
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}",
                       rec.times[r], o.trace.real(), o.trace.imag(), o.purity, o.mean_x, o.mean_p,
                       o.var_x, o.second_moment_p, o.kinetic_energy);
    for (const auto& c : o.coherence_samples) {
      out << fmt::format(",{:.17g},{:.17g}", c.value.real(), c.value.imag());
    }
    for (const auto& c : extras) out << fmt::format(",{:.17g}", c.values[r]);
    out << '\n';
  }
}

void write_results(const fs::path& file, const std::vector<CheckResult>& checks) {
  std::ofstream out(file, std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write {}", file.string()));
  out << "check,measured,relation,tolerance,pass\n";
  for (const auto& c : checks) {
    out << fmt::format("{},{:.17g},{},{},{}\n", c.name, c.measured, c.relation,
                       c.relation == "info" ? "" : format_number(c.tolerance),
                       c.relation == "info" ? "info" : (c.pass ? "true" : "false"));
  }
}

nlohmann::json tree_to_json(const pt::ptree& tree) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [section, body] : tree) {
    for (const auto& [key, value] : body) j[section][key] = value.data();
  }
  return j;
}

CheckResult at_most(std::string name, double measured, double tolerance) {
  return {std::move(name), measured, tolerance, "<=", measured <= tolerance};
}

CheckResult at_least(std::string name, double measured, double bound) {
  return {std::move(name), measured, bound, ">=", measured >= bound};
}

CheckResult info(std::string name, double value) {
  return {std::move(name), value, 0.0, "info", true};
}

void add_health(std::vector<CheckResult>& checks, const TrajectoryRecord& rec) {
  const HealthLimits lim;
  checks.push_back(at_most("trace_drift", rec.max_trace_drift(), lim.trace));
  checks.push_back(at_most("hermiticity_drift", rec.max_hermiticity_drift(), lim.hermiticity));
  checks.push_back(at_least("min_eigenvalue", rec.lowest_eigenvalue(), lim.eigenvalue));
}

// ---------------------------------------------------------------------------
// Scenarios

void run_evolution(const ScenarioConfig& cfg, const fs::path& dir, ScenarioResult& result) {
  const Grid grid = build(cfg, "grid", [&] { return make_grid(cfg.n_points, cfg.length); });
  const GeneratorSpec spec = build(cfg, "generator", [&] { return make_generator(grid, cfg.generator); });
  const DensityMatrix rho0 = build(cfg, "state", [&] { return make_state(grid, cfg.state); });

  const EvolutionSettings& ev = cfg.evolution;
  EvolutionConfig ec;
  ec.dt = ev.dt;
  ec.t_final = ev.t_final;
  ec.mass = ev.mass;
  ec.include_free_hamiltonian = ev.free_hamiltonian;
  ec.record_every = ev.record_every;
  ec.coherence_sites = ev.coherence;
  const bool cat = cfg.state.kind == "cat";
  if (cat && ec.coherence_sites.empty()) {
    const double half = 0.5 * cfg.state.separation;
    ec.coherence_sites.push_back({lattice_index(grid, half), lattice_index(grid, -half)});
  }
  if (ev.snapshots == "final") {
    emit_snapshot(rho0, (dir / "snapshot_initial.bin").string());
    result.outputs.push_back("snapshot_initial.bin");
  }

  const TrajectoryRecord rec = build(cfg, "evolution", [&] { return evolve(rho0, spec, ec); });
  const auto& times = rec.times;
  const std::size_t n_rec = times.size();
  std::vector<Column> extras;
  auto& checks = result.checks;
  add_health(checks, rec);

  switch (cfg.kind) {
    case ScenarioKind::PureDissipator: {
      if (!ec.coherence_sites.empty() && spec.is_c_number()) {
        const CoherenceSite site = ec.coherence_sites.front();
        const Complex c0 = rho0.matrix()(site.row, site.col);
        const double s = grid.wrapped_separation(site.row, site.col);
        const int offset = ((site.row - site.col) % grid.n_points() + grid.n_points()) % grid.n_points();
        const Complex rate = spec.offset_multiplier()[offset];
        Column ratio{"coherence_ratio", {}}, analytic{"analytic_factor", {}};
        double worst = 0.0;
        for (std::size_t r = 0; r < n_rec; ++r) {
          const Complex got = rec.observables[r].coherence_samples.front().value / c0;
          const Complex want =
              spec.kind() == GeneratorKind::Grw
                  ? Complex(analytic_offdiagonal_factor(cfg.generator.lambda, cfg.generator.alpha,
                                                        s, times[r]))
                  : std::exp(rate * times[r]);
          ratio.values.push_back(got.real());
          analytic.values.push_back(want.real());
          worst = std::max(worst, std::abs(got - want) / std::abs(want));
        }
        extras.push_back(std::move(ratio));
        extras.push_back(std::move(analytic));
        checks.push_back(at_most("coherence_decay_relative_error", worst, cfg.checks.tolerance));
      }
      break;
    }
    case ScenarioKind::FreeGrw: {
      const double p2_0 = rec.observables.front().second_moment_p;
      const double slope_pred = 0.5 * cfg.generator.lambda * cfg.generator.alpha;
      Column pred{"p2_predicted", {}};
      double st = 0.0, sp = 0.0, stt = 0.0, stp = 0.0;
      for (std::size_t r = 0; r < n_rec; ++r) {
        const double t = times[r], p = rec.observables[r].second_moment_p;
        pred.values.push_back(p2_0 + slope_pred * t);
        st += t;
        sp += p;
        stt += t * t;
        stp += t * p;
      }
      const double n = static_cast<double>(n_rec);
      const double slope = (n * stp - st * sp) / (n * stt - st * st);
      extras.push_back(std::move(pred));
      checks.push_back(info("p2_slope", slope));
      checks.push_back(info("p2_slope_predicted", slope_pred));
      checks.push_back(at_most("p2_slope_relative_error", std::abs(slope / slope_pred - 1.0),
                               cfg.checks.tolerance));
      break;
    }
    case ScenarioKind::DissipativeQbm: {
      const QbmParams qp{cfg.generator.lambda_bar, cfg.generator.alpha_bar};
      const double p2_0 = rec.observables.front().second_moment_p;
      Column pred{"p2_predicted", {}};
      double worst = 0.0;
      for (std::size_t r = 0; r < n_rec; ++r) {
        const double want = qbm_second_moment_prediction(qp, p2_0, times[r]);
        pred.values.push_back(want);
        worst = std::max(worst, std::abs(rec.observables[r].second_moment_p - want) / want);
      }
      extras.push_back(std::move(pred));
      checks.push_back(at_most("p2_relative_error", worst, cfg.checks.tolerance));
      const double asymptote = 1.0 / (4.0 * qp.alpha_bar);
      checks.push_back(info("p2_final_over_asymptote",
                            rec.observables.back().second_moment_p / asymptote));
      break;
    }
    case ScenarioKind::LinearBoltzmann: {
      const GeneratorSettings& g = cfg.generator;
      const double target = g.test_mass / g.beta;
      const double p2_0 = rec.observables.front().second_moment_p;
      const double p2_t = rec.observables.back().second_moment_p;
      extras.push_back({"p2_equilibrium", std::vector<double>(n_rec, target)});
      const double tr0 = std::abs(apply_generator(spec, rho0).trace());
      const double tr1 = std::abs(apply_generator(spec, rec.final_state).trace());
      checks.push_back(at_most("generator_trace", std::max(tr0, tr1), cfg.checks.tolerance));
      const double lambda_eff = effective_rate(spec);
      checks.push_back(info("lambda_eff", lambda_eff));
      checks.push_back(info("p2_final", p2_t));
      if (!g.zero_energy_transfer) {
        // fraction of the initial gap to M/beta that has been closed
        const double progress = (p2_0 - p2_t) / (p2_0 - target);
        checks.push_back(at_least("relaxation_progress", progress, 0.0));
        const double rel = std::abs(p2_t / target - 1.0);
        if (cfg.evolution.t_final * lambda_eff >= 10.0) {
          checks.push_back(at_most("p2_vs_M_over_beta", rel, cfg.checks.equilibrium_tolerance));
        } else {
          checks.push_back(info("p2_vs_M_over_beta", rel));
        }
      }
      break;
    }
    default:
      break;
  }

  write_observables(dir / "observables.csv", rec, extras);
  result.outputs.push_back("observables.csv");
  if (ev.snapshots == "final") {
    emit_snapshot(rec.final_state, Representation::Position, (dir / "snapshot_final.bin").string());
    result.outputs.push_back("snapshot_final.bin");
  }
}

void run_two_particle(const ScenarioConfig& cfg, ScenarioResult& result) {
  const Grid grid = build(cfg, "grid", [&] {
    check_two_particle_size(cfg.n_points);
    return make_grid(cfg.n_points, cfg.length);
  });
  const GeneratorSettings& g = cfg.generator;
  const StateSettings& st = cfg.state;
  const double m = g.kind == "qbm" ? cfg.checks.particle_mass : 1.0;
  const TwoParticleState probe = build(cfg, "state", [&] {
    return product_state(grid, gaussian_packet(grid, st.x0, st.p0, st.sigma),
                         gaussian_packet(grid, st.x0_second, st.p0, st.sigma), m, m);
  });
  double residual = 0.0;
  if (g.kind == "grw") {
    residual = grw_amplification_residual(grid, {g.lambda, g.alpha}, probe.matrix());
  } else if (g.kind == "momentum_transfer") {
    const Grid cm_grid = make_grid(2 * cfg.n_points, cfg.length);
    const auto dist = build(cfg, "generator", [&] { return make_distribution(grid, g); });
    residual = cnumber_amplification_residual(
        momentum_transfer_generator(grid, g.lambda, dist),
        momentum_transfer_generator(grid, g.lambda, dist),
        momentum_transfer_generator(cm_grid, 2.0 * g.lambda, dist), probe.matrix());
  } else {
    residual = qbm_amplification_residual(g.reference_mass, g.lambda_bar, g.alpha_bar, probe);
  }
  result.checks.push_back(at_most("amplification_residual", residual, cfg.checks.tolerance));
}

void run_covariance(const ScenarioConfig& cfg, ScenarioResult& result) {
  const Grid grid = build(cfg, "grid", [&] { return make_grid(cfg.n_points, cfg.length); });
  const GeneratorSpec spec = build(cfg, "generator", [&] { return make_generator(grid, cfg.generator); });
  double worst = 0.0;
  for (int i = 0; i < cfg.checks.n_states; ++i) {
    const DensityMatrix rho =
        DensityMatrix::trusted(random_density_matrix(grid.n_points(), cfg.checks.seed + i));
    for (int s : cfg.checks.shifts) worst = std::max(worst, check_translation_covariance(spec, rho, s));
  }
  result.checks.push_back(at_most("covariance_residual", worst, cfg.checks.tolerance));
}

void run_params(const ScenarioConfig& cfg, const fs::path& dir, ScenarioResult& result) {
  const StrengthReport rep =
      build(cfg, "gas", [&] { return strength_report(cfg.grw_si, cfg.gas); });
  auto& c = result.checks;
  c.push_back(info("lambda_th_m", rep.collisional.lambda_th));
  c.push_back(info("alpha_coll_per_m2", rep.collisional.alpha_coll));
  c.push_back(info("lambda_coll_per_s", rep.collisional.lambda_coll));
  c.push_back(info("grw_alpha_per_m2", rep.grw.alpha));
  c.push_back(info("grw_lambda_per_s", rep.grw.lambda));
  c.push_back(info("grw_product", rep.grw_product));
  c.push_back(info("collisional_product", rep.collisional_product));
  c.push_back(info("ratio_collisional_over_grw", rep.ratio));
  nlohmann::json j;
  j["lambda_th"] = rep.collisional.lambda_th;
  j["collisional"] = {{"alpha", rep.collisional.alpha_coll}, {"lambda", rep.collisional.lambda_coll},
                      {"product", rep.collisional_product}};
  j["grw"] = {{"alpha", rep.grw.alpha}, {"lambda", rep.grw.lambda}, {"product", rep.grw_product}};
  j["ratio"] = rep.ratio;
  std::ofstream(dir / "params_report.json", std::ios::trunc) << j.dump(2) << '\n';
  result.outputs.push_back("params_report.json");
}

void run_equivalence(const ScenarioConfig& cfg, ScenarioResult& result) {
  const auto qs = build(cfg, "gas", [&] { return equivalence_samples(cfg.gas, cfg.checks.samples); });
  const EquivalentGrw e = collisional_params(cfg.gas);
  const double hbar = kCodata2018.hbar;
  auto& c = result.checks;
  c.push_back(at_most("kernel_vs_gaussian_max_relative_deviation", equivalence_check(cfg.gas, qs),
                      cfg.checks.tolerance));
  c.push_back(at_most("gamma_coefficient_error",
                      std::abs(power_law_fourier_coefficient() + 4.0 / 3.0), 1e-12));
  c.push_back(at_most("exponent_identity_error",
                      std::abs(cfg.gas.beta / (8.0 * cfg.gas.gas_mass) * e.alpha_coll * hbar * hbar - 1.0),
                      1e-12));
  c.push_back(info("double_width_exponent_deviation",
                   equivalence_check(cfg.gas, qs, GaussianExponent::DoubleWidth)));
  c.push_back(info("alpha_coll_per_m2", e.alpha_coll));
  c.push_back(info("lambda_coll_per_s", e.lambda_coll));
}

}  // namespace

ConfigError::ConfigError(const std::string& path, int line, const std::string& field,
                         const std::string& what)
    : std::runtime_error(line > 0 ? fmt::format("{}:{}: {}{}{}", path, line, field,
                                                field.empty() ? "" : ": ", what)
                                  : fmt::format("{}: {}{}{}", path, field,
                                                field.empty() ? "" : ": ", what)),
      line_(line),
      field_(field) {}

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::FreeGrw: return "free_grw";
    case ScenarioKind::PureDissipator: return "pure_dissipator";
    case ScenarioKind::DissipativeQbm: return "dissipative_qbm";
    case ScenarioKind::LinearBoltzmann: return "linear_boltzmann";
    case ScenarioKind::TwoParticleAmplification: return "two_particle_amplification";
    case ScenarioKind::CovarianceCheck: return "covariance_check";
    case ScenarioKind::ParamsReport: return "params_report";
    case ScenarioKind::EquivalenceCheck: return "equivalence_check";
  }
  return "?";
}

std::optional<ScenarioKind> parse_scenario_kind(const std::string& name) {
  for (auto k : {ScenarioKind::FreeGrw, ScenarioKind::PureDissipator, ScenarioKind::DissipativeQbm,
                 ScenarioKind::LinearBoltzmann, ScenarioKind::TwoParticleAmplification,
                 ScenarioKind::CovarianceCheck, ScenarioKind::ParamsReport,
                 ScenarioKind::EquivalenceCheck}) {
    if (name == to_string(k)) return k;
  }
  return std::nullopt;
}

ScenarioConfig load_config(const std::string& path, std::optional<ScenarioKind> kind_override) {
  Reader r(path);
  ScenarioConfig cfg;
  cfg.source = path;
  if (kind_override) {
    cfg.kind = *kind_override;
    r.resolved().put(pt::ptree::path_type(std::string("scenario") + '\0' + "kind", '\0'),
                     to_string(cfg.kind));
  } else {
    const std::string name =
        r.word("scenario", "kind",
               {"free_grw", "pure_dissipator", "dissipative_qbm", "linear_boltzmann",
                "two_particle_amplification", "covariance_check", "params_report",
                "equivalence_check"});
    cfg.kind = *parse_scenario_kind(name);
  }
  cfg.reproducible = r.flag("scenario", "reproducible", true);
  cfg.output_dir = r.text("scenario", "output_dir", "");

  if (uses_grid(cfg.kind)) {
    const long n = r.integer("grid", "n_points");
    if (n < 8 || n % 2 != 0) r.fail("grid", "n_points", "must be even and >= 8");
    if (n > 4096) r.fail("grid", "n_points", "must be <= 4096");
    cfg.n_points = static_cast<int>(n);
    cfg.length = r.positive("grid", "length");
    read_generator(r, cfg);
  }
  if (evolves(cfg.kind) || cfg.kind == ScenarioKind::TwoParticleAmplification) read_state(r, cfg);
  if (evolves(cfg.kind)) read_evolution(r, cfg);
  if (cfg.kind == ScenarioKind::ParamsReport || cfg.kind == ScenarioKind::EquivalenceCheck) {
    read_gas(r, cfg);
  }
  read_checks(r, cfg);
  cfg.resolved = r.resolved();
  return cfg;
}

bool ScenarioResult::passed() const { return first_failure() == nullptr; }

const CheckResult* ScenarioResult::first_failure() const {
  for (const auto& c : checks) {
    if (!c.pass) return &c;
  }
  return nullptr;
}

ComplexMatrix random_density_matrix(int n, unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  ComplexMatrix g(n, n);
  for (int k = 0; k < n; ++k) {
    for (int j = 0; j < n; ++j) g(j, k) = Complex(normal(rng), normal(rng));
  }
  ComplexMatrix rho = hermitian_part(g * g.adjoint());
  rho /= rho.trace().real();
  return rho;
}

ScenarioResult run_scenario(const ScenarioConfig& cfg, const fs::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw std::runtime_error(fmt::format("cannot create output directory {}", out_dir.string()));
  }
  spectral::set_planning(cfg.reproducible ? spectral::Planning::Deterministic
                                          : spectral::Planning::Measured);

  ScenarioResult result;
  switch (cfg.kind) {
    case ScenarioKind::FreeGrw:
    case ScenarioKind::PureDissipator:
    case ScenarioKind::DissipativeQbm:
    case ScenarioKind::LinearBoltzmann:
      run_evolution(cfg, out_dir, result);
      break;
    case ScenarioKind::TwoParticleAmplification:
      run_two_particle(cfg, result);
      break;
    case ScenarioKind::CovarianceCheck:
      run_covariance(cfg, result);
      break;
    case ScenarioKind::ParamsReport:
      run_params(cfg, out_dir, result);
      break;
    case ScenarioKind::EquivalenceCheck:
      run_equivalence(cfg, result);
      break;
  }

  write_results(out_dir / "results.csv", result.checks);
  result.outputs.push_back("results.csv");
  pt::write_ini((out_dir / "resolved.ini").string(), cfg.resolved);
  result.outputs.push_back("resolved.ini");

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  nlohmann::json manifest;
  manifest["scenario"] = to_string(cfg.kind);
  manifest["config_path"] = cfg.source;
  manifest["config"] = tree_to_json(cfg.resolved);
  manifest["reproducible"] = cfg.reproducible;
  manifest["library"] = {
      {"name", "tcme"},
      {"version", TCME_VERSION},
      {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
      {"fftw", std::string(fftw_version)},
      {"boost", std::string(BOOST_LIB_VERSION)}};
  manifest["wall_time_seconds"] = wall;
  manifest["passed"] = result.passed();
  manifest["outputs"] = result.outputs;
  std::ofstream(out_dir / "manifest.json", std::ios::trunc) << manifest.dump(2) << '\n';
  result.outputs.push_back("manifest.json");
  return result;
}

}  // namespace tcme
