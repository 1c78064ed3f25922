// tcme: run simulation and verification scenarios from an INI config.
//
//   tcme simulate --config run.ini --out results/
//   tcme verify   --suite covariance_check --config run.ini
//   tcme params   --config gas.ini
//
// The output directory comes from --out, else $TCME_OUTPUT_DIR, else
// [scenario] output_dir. Exit codes: 0 ok, 1 a check failed, 2 bad config or
// usage, 3 the state became non-finite, 4 I/O or other runtime failure.

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "tcme/scenario.hpp"
#include "tcme/snapshot.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kBadConfig = 2;
constexpr int kNonFinite = 3;
constexpr int kRuntime = 4;

std::filesystem::path output_dir(const std::string& flag, const tcme::ScenarioConfig& cfg) {
  if (!flag.empty()) return flag;
  if (const char* env = std::getenv("TCME_OUTPUT_DIR"); env && *env) return env;
  if (!cfg.output_dir.empty()) return cfg.output_dir;
  throw tcme::ConfigError(cfg.source, 0, "[scenario] output_dir",
                          "no output directory (use --out, TCME_OUTPUT_DIR or output_dir)");
}

void print_checks(const tcme::ScenarioResult& r) {
  for (const auto& c : r.checks) {
    if (c.relation == "info") {
      fmt::print("  {:<44} {:.17g}\n", c.name, c.measured);
    } else {
      fmt::print("  {:<44} {:.6e} {} {:.3e}  {}\n", c.name, c.measured, c.relation, c.tolerance,
                 c.pass ? "PASS" : "FAIL");
    }
  }
}

int run(const std::string& config, const std::string& out,
        std::optional<tcme::ScenarioKind> suite, bool verbose) {
  const tcme::ScenarioConfig cfg = tcme::load_config(config, suite);
  const auto dir = output_dir(out, cfg);
  const tcme::ScenarioResult r = tcme::run_scenario(cfg, dir);
  if (verbose) {
    fmt::print("{} -> {}\n", tcme::to_string(cfg.kind), dir.string());
    print_checks(r);
  }
  if (const auto* bad = r.first_failure()) {
    fmt::print(stderr, "check failed: {} = {:.6e}, required {} {:.3e}\n", bad->name,
               bad->measured, bad->relation, bad->tolerance);
    return kCheckFailed;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Translation-covariant master equations on a periodic lattice"};
  app.require_subcommand(1);

  std::string config, out, suite, snapshot_path;
  auto* simulate = app.add_subcommand("simulate", "run the scenario named in the config");
  simulate->add_option("--config", config, "INI config file")->required()->check(CLI::ExistingFile);
  simulate->add_option("--out", out, "output directory");

  auto* verify = app.add_subcommand("verify", "run a scenario as a pass/fail suite");
  verify->add_option("--suite", suite, "scenario kind to run")->required();
  verify->add_option("--config", config, "INI config file")->required()->check(CLI::ExistingFile);
  verify->add_option("--out", out, "output directory");

  auto* params = app.add_subcommand("params", "print collisional parameters for a gas");
  params->add_option("--config", config, "INI config file")->required()->check(CLI::ExistingFile);
  params->add_option("--out", out, "output directory");

  auto* inspect = app.add_subcommand("snapshot-info", "print the header of a snapshot file");
  inspect->add_option("path", snapshot_path, "snapshot file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadConfig;
  }

  try {
    if (*simulate) return run(config, out, std::nullopt, true);
    if (*verify) {
      const auto kind = tcme::parse_scenario_kind(suite);
      if (!kind) {
        fmt::print(stderr, "unknown suite '{}'\n", suite);
        return kBadConfig;
      }
      return run(config, out, kind, true);
    }
    if (*params) return run(config, out, tcme::ScenarioKind::ParamsReport, true);
    if (*inspect) {
      tcme::Representation rep{};
      const auto m = tcme::read_snapshot_entries(snapshot_path, &rep);
      fmt::print("n_points {}\nrepresentation {}\ntrace {:.17g}\n", m.rows(),
                 rep == tcme::Representation::Position ? "position" : "momentum",
                 m.trace().real());
      return kOk;
    }
  } catch (const tcme::ConfigError& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return kBadConfig;
  } catch (const tcme::NonFiniteState& e) {
    fmt::print(stderr, "runtime error: {}\n", e.what());
    return kNonFinite;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kRuntime;
  }
  return kOk;
}
