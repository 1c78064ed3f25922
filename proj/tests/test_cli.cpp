#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <unistd.h>

#include <fmt/format.h>

#include "tcme/scenario.hpp"
#include "tcme/snapshot.hpp"
#include "tcme/states.hpp"

using namespace tcme;
namespace fs = std::filesystem;

namespace {

struct Scratch {
  fs::path dir;
  Scratch() {
    static int counter = 0;
    dir = fs::temp_directory_path() / fmt::format("tcme_cli_{}_{}", ::getpid(), counter++);
    fs::create_directories(dir);
  }
  ~Scratch() {
    std::error_code ec;
    fs::remove_all(dir, ec);
  }
  fs::path write(const std::string& name, const std::string& text) const {
    std::ofstream(dir / name) << text;
    return dir / name;
  }
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

int tool(const std::string& args) {
  const int status = std::system(fmt::format("\"{}\" {} >/dev/null 2>&1", TCME_TOOL_PATH, args).c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const char* kCatConfig =
    "[scenario]\nkind = pure_dissipator\n"
    "[grid]\nn_points = 64\nlength = 32\n"
    "[generator]\nkind = grw\nlambda = 1\nalpha = 4\n"
    "[state]\nkind = cat\nseparation = 8\nsigma = 1\n"
    "[evolution]\ndt = 1e-3\nt_final = 1\nrecord_every = 25\n";

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("snapshot round trip and layout") {
  Scratch s;
  const ComplexMatrix rho = random_density_matrix(64, 3);
  const std::string path = (s.dir / "a.bin").string();
  emit_snapshot(rho, Representation::Momentum, path);
  CHECK(fs::file_size(path) == 32 + 64 * 64 * 16);
  CHECK(snapshot_size(64) == fs::file_size(path));
  Representation rep{};
  const ComplexMatrix back = read_snapshot_entries(path, &rep);
  CHECK(rep == Representation::Momentum);
  CHECK((back - rho).cwiseAbs().maxCoeff() == 0.0);
  CHECK(load_snapshot(path).representation() == Representation::Momentum);

  // header bytes: magic, then version 1 little-endian, then n = 64
  const std::string bytes = slurp(path);
  CHECK(bytes.substr(0, 8) == "TCMESNAP");
  CHECK(bytes[8] == 1);
  CHECK(bytes[12] == 64);
  CHECK(bytes[16] == 1);
  // element (0, 1) lives right after (0, 0): row-major
  double re01 = 0.0;
  std::memcpy(&re01, bytes.data() + 32 + 16, 8);
  CHECK(re01 == rho(0, 1).real());
}

TEST_CASE("snapshot format errors name the offset") {
  Scratch s;
  const std::string path = (s.dir / "b.bin").string();
  emit_snapshot(random_density_matrix(8, 1), Representation::Position, path);
  const std::string good = slurp(path);

  auto expect_offset = [&](const std::string& content, std::size_t offset) {
    std::ofstream(path, std::ios::binary | std::ios::trunc) << content;
    try {
      read_snapshot_entries(path);
      FAIL("no error raised");
    } catch (const SnapshotFormatError& e) {
      CHECK(e.offset() == offset);
      CHECK(std::string(e.what()).find(std::to_string(offset)) != std::string::npos);
    }
  };
  expect_offset(good.substr(0, good.size() - 5), good.size() - 5);
  expect_offset(good.substr(0, 20), 20);
  std::string bad = good;
  bad[0] = 'X';
  expect_offset(bad, 0);
  bad = good;
  bad[8] = 7;
  expect_offset(bad, 8);
  bad = good;
  bad[16] = 5;
  expect_offset(bad, 16);
  bad = good;
  bad[25] = 1;
  expect_offset(bad, 25);
  expect_offset(good + "x", good.size());
}

TEST_CASE("config validation names line and field") {
  Scratch s;
  std::string text = kCatConfig;
  text.replace(text.find("alpha = 4\n"), 10, "");
  try {
    load_config(s.write("missing.ini", text).string());
    FAIL("accepted config without alpha");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "[generator] alpha");
    CHECK(std::string(e.what()).find("alpha") != std::string::npos);
  }

  text = kCatConfig;
  text.replace(text.find("lambda = 1"), 10, "lambda = -2");
  try {
    load_config(s.write("negative.ini", text).string());
    FAIL("accepted negative lambda");
  } catch (const ConfigError& e) {
    CHECK(e.field() == "[generator] lambda");
    CHECK(e.line() == 8);
  }

  text = std::string(kCatConfig) + "bogus = 3\n";
  try {
    load_config(s.write("unknown.ini", text).string());
    FAIL("accepted unknown key");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 18);
  }

  try {
    load_config(s.write("syntax.ini", "[grid\nn_points = 64\n").string());
    FAIL("accepted malformed section");
  } catch (const ConfigError& e) {
    CHECK(e.line() == 1);
  }

  // library-level invariants are caught before the run starts
  text = kCatConfig;
  text.replace(text.find("separation = 8"), 14, "separation = 3");
  const ScenarioConfig cfg = load_config(s.write("cat.ini", text).string());
  CHECK_THROWS_AS(run_scenario(cfg, s.dir / "out"), ConfigError);
}

TEST_CASE("resolved config reproduces the run") {
  Scratch s;
  const ScenarioConfig cfg = load_config(s.write("cat.ini", kCatConfig).string());
  REQUIRE(run_scenario(cfg, s.dir / "a").passed());
  const ScenarioConfig again = load_config((s.dir / "a" / "resolved.ini").string());
  REQUIRE(run_scenario(again, s.dir / "b").passed());
  CHECK(slurp(s.dir / "a" / "observables.csv") == slurp(s.dir / "b" / "observables.csv"));
  CHECK(slurp(s.dir / "a" / "manifest.json").find("\"scenario\": \"pure_dissipator\"") !=
        std::string::npos);
}

TEST_CASE("cat-state coherence ratio follows the analytic factor") {
  Scratch s;
  const ScenarioConfig cfg = load_config(s.write("cat.ini", kCatConfig).string());
  REQUIRE(run_scenario(cfg, s.dir).passed());
  const auto rows = read_csv(s.dir / "observables.csv");
  const auto& head = rows.front();
  REQUIRE(head.size() == 13);
  CHECK(head[0] == "t");
  CHECK(head[8] == "energy");
  CHECK(head[9] == "coh_0_re");
  CHECK(head[10] == "coh_0_im");
  CHECK(head[11] == "coherence_ratio");
  CHECK(head[12] == "analytic_factor");
  CHECK(rows.size() == 1 + 41);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const double t = std::stod(rows[r][0]);
    const double ratio = std::stod(rows[r][11]);
    const double want = std::exp(-(1.0 - std::exp(-4.0 * 64.0 / 4.0)) * t);
    CHECK(std::abs(ratio - want) <= 1e-8 * want);
  }
}

TEST_CASE("verification scenarios") {
  Scratch s;
  const auto cov = s.write("cov.ini",
                           "[scenario]\nkind = covariance_check\n[grid]\nn_points = 32\nlength = 16\n"
                           "[generator]\nkind = grw\nlambda = 1\nalpha = 2\n[checks]\nn_states = 5\n");
  const ScenarioResult r = run_scenario(load_config(cov.string()), s.dir / "cov");
  REQUIRE(r.checks.size() == 1);
  CHECK(r.checks[0].measured <= 1e-12);

  const auto eq = s.write("eq.ini",
                          "[scenario]\nkind = equivalence_check\n[gas]\ndensity = 2.4e25\n"
                          "gas_mass = 6.6e-27\ntemperature = 300\ncoupling = 1e-60\ntest_mass = 1e-25\n");
  const ScenarioResult e = run_scenario(load_config(eq.string()), s.dir / "eq");
  CHECK(e.passed());
  const auto rows = read_csv(s.dir / "eq" / "results.csv");
  CHECK(rows.front()[0] == "check");
  CHECK(rows[1][0] == "kernel_vs_gaussian_max_relative_deviation");

  // an impossible tolerance fails and says which check
  const auto strict = s.write("strict.ini", std::string(kCatConfig) + "[checks]\ntolerance = 1e-18\n");
  const ScenarioResult f = run_scenario(load_config(strict.string()), s.dir / "strict");
  REQUIRE(f.first_failure() != nullptr);
  CHECK(f.first_failure()->name == "coherence_decay_relative_error");
}

TEST_CASE("command-line exit codes") {
  Scratch s;
  const auto good = s.write("good.ini", kCatConfig);
  CHECK(tool(fmt::format("simulate --config {} --out {}", good.string(), (s.dir / "o").string())) == 0);
  CHECK(fs::exists(s.dir / "o" / "manifest.json"));
  CHECK(fs::exists(s.dir / "o" / "snapshot_final.bin"));

  std::string text = kCatConfig;
  text.replace(text.find("alpha = 4\n"), 10, "");
  const auto missing = s.write("missing.ini", text);
  CHECK(tool(fmt::format("simulate --config {} --out {}", missing.string(), (s.dir / "m").string())) == 2);

  const auto strict = s.write("strict.ini", std::string(kCatConfig) + "[checks]\ntolerance = 1e-18\n");
  CHECK(tool(fmt::format("verify --suite pure_dissipator --config {} --out {}", strict.string(),
                         (s.dir / "v").string())) == 1);
  CHECK(tool(fmt::format("verify --suite nonsense --config {}", good.string())) == 2);
  CHECK(tool("simulate") == 2);

  // output directory from the environment
  const std::string env_dir = (s.dir / "env").string();
  CHECK(std::system(fmt::format("TCME_OUTPUT_DIR=\"{}\" \"{}\" simulate --config {} >/dev/null",
                                env_dir, TCME_TOOL_PATH, good.string())
                        .c_str()) == 0);
  CHECK(fs::exists(fs::path(env_dir) / "observables.csv"));
  // no output directory anywhere
  CHECK(tool(fmt::format("simulate --config {}", good.string())) == 2);
}
