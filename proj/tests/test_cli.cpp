#include "qcons/cli.hpp"
#include "qcons/errors.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace qcons;

namespace {

std::filesystem::path scratch_dir(const std::string& name) {
  auto p = std::filesystem::temp_directory_path() / ("qcons_cli_test_" + name);
  std::filesystem::remove_all(p);
  return p;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

const char* kMorse = R"({
  "seed": 3,
  "model": {"type": "scalar_pair", "pair": [{"kind": "morse", "depth": 1.0, "width": 1.2, "r0": 1.3}]},
  "particles": {"count": 4, "masses": 1.0, "temperature": 0.05},
  "mollifier": {"epsilon": 1.0},
  "dynamics": {"dt": 0.001, "steps": 20},
  "conservation": {"dt_check": 1e-4, "tolerance": 1e-6}
})";

int run(const std::string& cmd, const std::string& text, const std::filesystem::path& dir, std::string* log = nullptr) {
  setenv("QCONS_OUTPUT_DIR", dir.c_str(), 1);
  std::ostringstream out;
  const int code = cli::run_command(cmd, text, 1, out);
  unsetenv("QCONS_OUTPUT_DIR");
  if (log) *log = out.str();
  return code;
}

}  // namespace

TEST_CASE("sha256 digest") {
  CHECK(config::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("configuration errors exit with code 2 and name the field") {
  const auto dir = scratch_dir("config");
  std::string log;
  std::string bad = kMorse;
  bad.replace(bad.find("\"epsilon\": 1.0"), 14, "\"epsilon\": -1.0");
  CHECK(run("run-md", bad, dir, &log) == cli::kConfigFailure);
  CHECK(log.find("mollifier.epsilon") != std::string::npos);

  std::string unknown = kMorse;
  unknown.replace(unknown.find("\"seed\""), 6, "\"sede\"");
  CHECK(run("run-md", unknown, dir, &log) == cli::kConfigFailure);
  CHECK(log.find("sede") != std::string::npos);

  CHECK(run("run-md", "{not json", dir) == cli::kConfigFailure);
  CHECK(run("gibbs-fit", kMorse, dir, &log) == cli::kConfigFailure);
  CHECK(log.find("ensemble") != std::string::npos);
}

TEST_CASE("physics errors exit with code 3") {
  const auto dir = scratch_dir("physics");
  const std::string text = R"({
    "model": {"type": "scalar_pair", "pair": [{"kind": "morse", "depth": 1.0, "width": 1.2, "r0": 1.3}]},
    "particles": {"count": 2, "positions": [0, 0, 0, 0, 0, 0]},
    "dynamics": {"steps": 1}
  })";
  CHECK(run("run-md", text, dir) == cli::kPhysicsFailure);
}

TEST_CASE("conservation check passes and fails on its tolerance") {
  const auto dir = scratch_dir("conserve");
  CHECK(run("conserve-check", kMorse, dir) == cli::kOk);
  const auto report = nlohmann::json::parse(slurp(dir / "conserve.json"));
  CHECK(report["report"]["passed"] == true);
  CHECK(report["seed"] == 3);
  CHECK(report["config_sha256"] == config::sha256_hex(kMorse));
  std::string strict = kMorse;
  strict.replace(strict.find("\"tolerance\": 1e-6"), 17, "\"tolerance\": 1e-30");
  CHECK(run("conserve-check", strict, dir) == cli::kCheckFailed);
}

TEST_CASE("outputs are byte-identical across runs and worker counts") {
  const auto a = scratch_dir("det_a"), b = scratch_dir("det_b");
  for (const char* cmd : {"run-md", "fields", "conserve-check"}) {
    REQUIRE(run(cmd, kMorse, a) == cli::kOk);
    setenv("QCONS_OUTPUT_DIR", b.c_str(), 1);
    std::ostringstream log;
    REQUIRE(cli::run_command(cmd, kMorse, 3, log) == cli::kOk);
    unsetenv("QCONS_OUTPUT_DIR");
  }
  for (const char* f : {"trajectory.csv", "fields.csv", "conserve.json", "conserve.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
    CHECK(!slurp(a / f).empty());
  }
  const std::string csv = slurp(a / "trajectory.csv");
  CHECK(csv.rfind("# qcons run-md config_sha256=", 0) == 0);
  CHECK(csv.find("# units:") != std::string::npos);
}

TEST_CASE("commutator subcommand reports pass and failure") {
  const auto dir = scratch_dir("comm");
  const std::string ok = R"({"quantum": {"commutator": {"grid_points": 64, "mass": 100,
      "potential": {"type": "fourier", "cos": [0.5]},
      "symbol": [{"degree": 2, "a": {"type": "fourier", "constant": 1.0, "sin": [0.2]}}]}}})";
  CHECK(run("commutator-check", ok, dir) == cli::kOk);
  std::string cubic = ok;
  cubic.replace(cubic.find("\"degree\": 2"), 11, "\"degree\": 3");
  CHECK(run("commutator-check", cubic, dir) == cli::kPhysicsFailure);
}
