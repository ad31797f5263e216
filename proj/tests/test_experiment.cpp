#include "eqlift/errors.hpp"
#include "eqlift/experiment.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace eqlift;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("eqlift_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

std::string read(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(EQLIFT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const fs::path kConfigs = fs::path(EQLIFT_SOURCE_DIR) / "configs" / "acceptance";

}  // namespace

TEST_CASE("config parsing") {
  const ExperimentConfig cfg = parse_config(
      "# comment\n"
      "scenario = sphere2-rotate\n"
      "pipeline = lift   # trailing comment\n"
      "degree = 2\n"
      "twist = 0.25\n"
      "mu_offsets = 1 -2\n"
      "omega_scale = sqrt2\n"
      "expect = no-lift\n"
      "expect_dimension = 0\n"
      "ode_steps = 512\n",
      "demo");
  CHECK(cfg.name == "demo");
  CHECK(cfg.degree == 2);
  CHECK(cfg.params.twist == 0.25);
  CHECK(cfg.mu_offsets == std::vector<double>{1.0, -2.0});
  CHECK(cfg.omega_scale == doctest::Approx(std::sqrt(2.0)));
  CHECK(cfg.expect_lift == false);
  CHECK(cfg.expect_dimension == 0);
  CHECK(cfg.quadrature.ode_steps == 512);
  CHECK(to_json(cfg)["scenario"] == "sphere2-rotate");
}

TEST_CASE("config errors carry line and field") {
  auto expect_error = [](const std::string& text, int line, const std::string& field) {
    try {
      parse_config(text);
      FAIL("expected ConfigError for: " << text);
    } catch (const ConfigError& e) {
      CHECK(e.line() == line);
      CHECK(e.field() == field);
    }
  };
  expect_error("scenario = sphere2-rotate\ndegree = two\n", 2, "degree");
  expect_error("scenario = sphere2-rotate\n\n\ncolour = red\n", 4, "colour");
  expect_error("scenario = sphere2-rotate\nexpect = maybe\n", 2, "expect");
  expect_error("scenario = sphere2-rotate\njust words\n", 2, "just words");
  expect_error("scenario = sphere2-rotate\nmu_offsets = 1 x\n", 2, "mu_offsets");
  expect_error("scenario = sphere2-rotate\nreport_timing = sometimes\n", 2, "report_timing");
  expect_error("pipeline = check\n", 0, "scenario");
  expect_error("scenario = klein-bottle\n", 0, "scenario");
  expect_error("scenario = sphere2-rotate\npipeline = fly\n", 0, "pipeline");
  expect_error("scenario = sphere2-rotate\ntol = 0\n", 0, "tol");
  expect_error("scenario = sphere2-rotate\nline_steps = 4\n", 0, "line_steps");
  CHECK_THROWS_AS(load_config("/nonexistent/thing.cfg"), ConfigError);

  ExperimentConfig cfg = parse_config("scenario = torus2-diag\n");
  apply_overrides(cfg, "seed = 9\nflat_a = 0.5\n");
  CHECK(cfg.seed == 9);
  CHECK(cfg.params.flat_a == 0.5);
  CHECK_THROWS_AS(apply_overrides(cfg, "samples = 0\n"), ConfigError);
}

TEST_CASE("reports are deterministic and honour the timing switch") {
  ExperimentConfig cfg = load_config(kConfigs / "classify-torus-translate.cfg");
  const Report a = run_experiment(cfg), b = run_experiment(cfg);
  CHECK(a.exit_code == exit_code::pass);
  CHECK(dump_report(a.document) == dump_report(b.document));
  CHECK_FALSE(a.document.contains("timing_seconds"));
  cfg.report_timing = true;
  CHECK(run_experiment(cfg).document.contains("timing_seconds"));
  cfg.report_timing = false;
  cfg.seed = 99;
  CHECK(run_experiment(cfg).exit_code == exit_code::pass);
}

TEST_CASE("verdicts and exit codes") {
  // half-integer moment map: no lift; without an expectation that is a failure
  ExperimentConfig h = parse_config("scenario = sphere2-rotate\npipeline = classify\ndegree = 1\nmu_offsets = 0.5\n");
  const Report rh = run_experiment(h);
  CHECK(rh.exit_code == exit_code::verdict_failure);
  CHECK(rh.verdict == "fail");
  h.expect_lift = false;
  CHECK(run_experiment(h).exit_code == exit_code::pass);
  h.expect_lift = true;
  CHECK(run_experiment(h).exit_code == exit_code::verdict_failure);

  ExperimentConfig d = parse_config("scenario = torus2-translate\npipeline = classify\nexpect_dimension = 3\n");
  CHECK(run_experiment(d).exit_code == exit_code::verdict_failure);
  d.expect_dimension = 1;
  CHECK(run_experiment(d).exit_code == exit_code::pass);

  ExperimentConfig acc = parse_config("scenario = sphere2-rotate\npipeline = lift\ndegree = 3\ntwist = 0.4\node_steps = 2\n");
  const Report ra = run_experiment(acc);
  CHECK(ra.exit_code == exit_code::accuracy);
  CHECK(ra.document["error"]["kind"] == "accuracy");

  ExperimentConfig bad = parse_config("scenario = torus2-diag\ndegree = 3\n");
  const Report rb = run_experiment(bad);
  CHECK(rb.exit_code == exit_code::verdict_failure);
  CHECK(rb.document["error"]["kind"] == "pipeline");
}

TEST_CASE("suite runs") {
  const fs::path empty = scratch("empty");
  const SuiteResult e = run_suite(empty, empty / "out");
  CHECK(e.rows.empty());
  CHECK(e.exit_code == exit_code::pass);
  CHECK(read(empty / "out" / "summary.csv").rfind("name,scenario", 0) == 0);
  CHECK_THROWS_AS(run_suite(empty / "missing"), ConfigError);

  const fs::path dir = scratch("mixed");
  write(dir / "b_good.cfg", "scenario = torus2-diag\npipeline = classify\n");
  write(dir / "a_broken.cfg", "scenario = torus2-diag\ndegree = lots\n");
  write(dir / "notes.txt", "ignored\n");
  const SuiteResult r = run_suite(dir, dir / "out");
  REQUIRE(r.rows.size() == 2);
  CHECK(r.rows[0].name == "a_broken");
  CHECK(r.rows[0].verdict == "error");
  CHECK(r.rows[0].exit_code == exit_code::usage);
  CHECK(r.rows[0].error.find("line 2") != std::string::npos);
  CHECK(r.rows[1].verdict == "pass");
  CHECK(r.exit_code == exit_code::verdict_failure);
  CHECK(fs::exists(dir / "out" / "b_good.json"));
  CHECK_FALSE(fs::exists(dir / "out" / "a_broken.json"));
  const std::string csv = read(dir / "out" / "summary.csv");
  CHECK(csv.find("a_broken,,,error,2") != std::string::npos);
}

TEST_CASE("command line exit codes") {
  const fs::path dir = scratch("cli");
  const std::string good = (kConfigs / "check-torus-diag.cfg").string();
  CHECK(run_cli("check --config " + good + " --out " + (dir / "reports").string()) == 0);
  CHECK(fs::is_regular_file(dir / "reports" / "check-torus-diag.json"));
  CHECK(run_cli("check --config " + good + " --set ode_steps=256 --seed 4") == 0);
  CHECK(run_cli("check") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("check --config /nonexistent.cfg") == 2);
  write(dir / "bad.cfg", "scenario = sphere2-rotate\ndegree = x\n");
  CHECK(run_cli("classify --config " + (dir / "bad.cfg").string()) == 2);
  write(dir / "half.cfg", "scenario = sphere2-rotate\ndegree = 1\nmu_offsets = 0.5\n");
  CHECK(run_cli("classify --config " + (dir / "half.cfg").string()) == 1);
  write(dir / "acc.cfg", "scenario = sphere2-rotate\ndegree = 3\ntwist = 0.4\n");
  CHECK(run_cli("lift --config " + (dir / "acc.cfg").string() + " --steps 2") == 3);
  CHECK(run_cli("suite " + scratch("cli_empty").string()) == 0);
}
