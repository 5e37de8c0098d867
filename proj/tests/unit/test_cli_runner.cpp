#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "skel/config.hpp"
#include "skel/csv.hpp"
#include "skel/error.hpp"
#include "skel/rng.hpp"
#include "skel/runner.hpp"

using namespace skel;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_text(const fs::path& p, const std::string& text) {
  std::ofstream(p) << text;
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(SKEL_CLI_PATH) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// Small preset with every sample count cut down for quick runs.
json quick_config() {
  return json{{"system", {{"preset", "example-k2-small"}}},
              {"audit", {{"points", 300}, {"pairs", 300}, {"probe_pairs", 300}}},
              {"ulam", {{"resolution", 16}, {"samples_per_cell", 16}}},
              {"correlation", {{"n_max", 6}, {"ensemble", 4000}, {"h_resolution", 64}}}};
}

std::string validation_message(const json& j) {
  try {
    parse_config_json(j);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::validation);
    return e.what();
  }
  FAIL("expected validation error");
  return {};
}

}  // namespace

TEST_SUITE("cli_runner") {

TEST_CASE("minimal preset config gets defaults") {
  const auto cfg = parse_config_json(json{{"system", {{"preset", "example-k2-full"}}}});
  CHECK(cfg.model.A == 101.0);
  CHECK(cfg.model.sigma == 100.0);
  CHECK(cfg.seed == kDefaultSeed);
  CHECK(cfg.ulam.seed == kDefaultSeed);
  CHECK(cfg.correlation.seed == kDefaultSeed);
  CHECK(cfg.ulam.resolution == std::vector<std::size_t>{64, 64});
  CHECK(cfg.correlation.ensemble == 100000);
}

TEST_CASE("validation errors name the key") {
  auto j = json{{"system", {{"preset", "example-k2-full"}}}, {"model", {{"sigma", 0.5}}}};
  CHECK(validation_message(j).find("sigma must exceed 1") != std::string::npos);

  j = json{{"system", {{"preset", "example-k2-full"}}}, {"model", {{"sigam", 100}}}};
  CHECK(validation_message(j).find("sigam") != std::string::npos);

  j = json{{"system", {{"preset", "example-k2-full"}}}, {"ulam", {{"resolution", 4}}}};
  CHECK(validation_message(j).find("ulam.resolution") != std::string::npos);

  j = json{{"system", {{"example", true}}}};
  CHECK(validation_message(j).find("model") != std::string::npos);
}

TEST_CASE("malformed JSON reports the location") {
  TempDir dir("skel_unit_badjson");
  const auto p = write_text(dir.path / "bad.json", "{\n  \"system\": {,\n}");
  try {
    parse_config(p);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::parse);
    CHECK(std::string(e.what()).find(":2:") != std::string::npos);
  }
}

TEST_CASE("seed override reaches every stream") {
  auto cfg = parse_config_json(quick_config());
  override_seed(cfg, 42);
  CHECK(cfg.seed == 42);
  CHECK(cfg.audit.seed == 42);
  CHECK(cfg.ulam.seed == 42);
  CHECK(cfg.correlation.seed == 42);
}

TEST_CASE("csv formatting and round trip") {
  TempDir dir("skel_unit_csv");
  Rng rng = make_rng(1, Stream::probe);
  CsvTable t{{"a", "b"}, {}};
  for (int i = 0; i < 50; ++i)
    t.rows.push_back({uniform(rng, -1, 1) * std::pow(10.0, i % 20 - 10), std::ldexp(1.0, -i)});
  write_csv(t, dir.path / "t.csv");
  const auto back = read_csv(dir.path / "t.csv");
  CHECK(back.header == t.header);
  CHECK(back.rows == t.rows);
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK_THROWS_AS(write_csv(t, "/proc/skel/t.csv"), Error);
}

TEST_CASE("exit code table") {
  CHECK(exit_code(ErrorKind::model_consistency) == 3);
  CHECK(exit_code(ErrorKind::convergence) == 4);
  CHECK(exit_code(ErrorKind::spectral) == 4);
  CHECK(exit_code(ErrorKind::io) == 5);
  CHECK(exit_code(ErrorKind::validation) == 1);
  CHECK(exit_code(ErrorKind::parse) == 1);
}

TEST_CASE("check command exit status") {
  TempDir dir("skel_unit_check");
  const auto full = write_text(dir.path / "full.json", R"({"system":{"preset":"example-k2-full"}})");
  CHECK(run_cli("check --config " + full.string() + " --out " + (dir.path / "a").string()) == 0);

  const auto weak = write_text(dir.path / "weak.json",
                               R"({"system":{"preset":"example-k2-full"},"model":{"sigma":1.2}})");
  CHECK(run_cli("check --config " + weak.string() + " --out " + (dir.path / "b").string()) == 2);
  const auto h = json::parse(slurp(dir.path / "b" / "hypotheses.json"));
  bool eta_failed = false;
  for (const auto& e : h.at("entries"))
    if (e.at("name") == "eta < 1") eta_failed = !e.at("pass").get<bool>();
  CHECK(eta_failed);
}

TEST_CASE("fault injection exit codes") {
  TempDir dir("skel_unit_faults");
  // Branch leaving [-L, L]: model-consistency error.
  const auto escape = write_text(dir.path / "escape.json", R"({
    "model": {"A": 2, "sigma": 1.2},
    "system": {"branches": [{"phi": "2*x1"}]},
    "ulam": {"resolution": 16, "samples_per_cell": 16}
  })");
  CHECK(run_cli("ulam --config " + escape.string() + " --out " + (dir.path / "a").string()) == 3);

  // Power iteration starved of iterations: convergence error.
  auto j = quick_config();
  j["ulam"]["tol"] = 1e-300;
  j["ulam"]["max_iter"] = 2;
  const auto starved = write_text(dir.path / "starved.json", j.dump());
  CHECK(run_cli("ulam --config " + starved.string() + " --out " + (dir.path / "b").string()) == 4);

  // Output directory held by another run: I/O error.
  const auto quick = write_text(dir.path / "quick.json", quick_config().dump());
  fs::create_directories(dir.path / "c");
  write_text(dir.path / "c" / ".skel.lock", "");
  CHECK(run_cli("check --config " + quick.string() + " --out " + (dir.path / "c").string()) == 5);

  CHECK(run_cli("check --config " + (dir.path / "missing.json").string()) == 5);
  const auto bad = write_text(dir.path / "bad.json", "{");
  CHECK(run_cli("check --config " + bad.string()) == 1);
}

TEST_CASE("lock file is released after a run") {
  TempDir dir("skel_unit_lock");
  const auto cfg = parse_config_json(quick_config());
  std::ostringstream log;
  CHECK(run_command("build-example", cfg, {dir.path, &log}) == 0);
  CHECK_FALSE(fs::exists(dir.path / ".skel.lock"));
  CHECK(run_command("build-example", cfg, {dir.path, &log}) == 0);
}

TEST_CASE("report bundles every section") {
  TempDir dir("skel_unit_report");
  const auto cfg = parse_config_json(quick_config());
  std::ostringstream log;
  run_command("report", cfg, {dir.path, &log});
  const auto r = json::parse(slurp(dir.path / "report.json"));
  for (const char* key : {"hypotheses", "expansion", "spectrum", "marginals", "correlation"})
    CHECK_MESSAGE(r.contains(key), key);
  for (const char* f : {"density.csv", "spectrum.csv", "components.csv", "marginal_1.csv",
                        "marginal_2.csv", "correlation.csv"})
    CHECK_MESSAGE(fs::exists(dir.path / f), f);
}

TEST_CASE("same config and seed give byte-identical csv") {
  TempDir dir("skel_unit_repro");
  const auto cfg = parse_config_json(quick_config());
  std::ostringstream log;
  for (const char* run : {"a", "b"}) {
    run_command("ulam", cfg, {dir.path / run, &log});
    run_command("marginals", cfg, {dir.path / run, &log});
    run_command("correlate", cfg, {dir.path / run, &log});
  }
  int compared = 0;
  for (const auto& e : fs::directory_iterator(dir.path / "a")) {
    if (e.path().extension() != ".csv") continue;
    CHECK_MESSAGE(slurp(e.path()) == slurp(dir.path / "b" / e.path().filename()), e.path().string());
    ++compared;
  }
  CHECK(compared >= 5);
}

TEST_CASE("unknown command") {
  const auto cfg = parse_config_json(quick_config());
  CHECK_THROWS_AS(run_command("dance", cfg), Error);
}

}
