// Command-line runner for lifting experiments.
#include "eqlift/errors.hpp"
#include "eqlift/experiment.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace eqlift;

namespace {

struct Options {
  std::string config;
  std::string out;
  std::string overrides;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<int> steps;
};

void print_summary(std::ostream& os, const Report& rep) {
  const auto& doc = rep.document;
  os << doc["config"]["name"].get<std::string>() << " [" << doc["config"]["scenario"].get<std::string>() << ", "
     << doc["config"]["pipeline"].get<std::string>() << "]: " << rep.verdict << " (" << rep.checks_passed << "/"
     << rep.checks_total << " checks)\n";
  for (const auto& c : doc["checks"]["list"]) {
    os << "  " << (c["pass"].get<bool>() ? "ok   " : "FAIL ") << c["name"].get<std::string>()
       << "  residual=" << c["residual"].dump() << " tol=" << c["tolerance"].dump() << "\n";
  }
  if (doc.contains("error")) os << "  error: " << doc["error"]["message"].get<std::string>() << "\n";
}

int run_pipeline(const std::string& verb, const Options& opt) {
  ExperimentConfig cfg = load_config(opt.config);
  cfg.pipeline = verb;
  if (!opt.overrides.empty()) {
    std::ifstream in(opt.overrides);
    if (!in) throw ConfigError("cannot read overrides '" + opt.overrides + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    apply_overrides(cfg, ss.str());
  }
  for (const auto& kv : opt.sets) apply_overrides(cfg, kv);
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.tol) cfg.tol = *opt.tol;
  if (opt.steps) cfg.quadrature.ode_steps = *opt.steps;
  validate(cfg);

  const Report rep = run_experiment(cfg);
  if (opt.out.empty()) {
    std::cout << dump_report(rep.document);
  } else {
    fs::create_directories(opt.out);
    std::ofstream(fs::path(opt.out) / (cfg.name + ".json")) << dump_report(rep.document);
    print_summary(std::cout, rep);
  }
  return rep.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"eqlift: lifts of torus actions to Hermitian line bundles"};
  app.require_subcommand(1);
  Options opt;
  std::string suite_dir, suite_out;

  for (const std::string verb : {"check", "solve", "classify", "lift", "hamiltonian", "rationalize"}) {
    auto* sub = app.add_subcommand(verb, "run the " + verb + " pipeline on one config");
    sub->add_option("--config", opt.config, "experiment config (key = value)")->required();
    sub->add_option("--out", opt.out, "output directory for the JSON report");
    sub->add_option("--seed", opt.seed, "random seed");
    sub->add_option("--tol", opt.tol, "moment/integrality tolerance");
    sub->add_option("--steps", opt.steps, "ODE steps per period");
    sub->add_option("--overrides", opt.overrides, "override file (key = value)");
    sub->add_option("--set", opt.sets, "single override key=value");
  }
  auto* suite = app.add_subcommand("suite", "run every *.cfg of a directory");
  suite->add_option("dir", suite_dir, "directory of configs")->required();
  suite->add_option("--out", suite_out, "output directory for reports and summary.csv");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code::usage;
  }

  try {
    if (suite->parsed()) {
      const auto result = run_suite(suite_dir, suite_out.empty() ? std::nullopt : std::optional<fs::path>(suite_out));
      std::cout << result.csv();
      return result.exit_code;
    }
    for (auto* sub : app.get_subcommands()) return run_pipeline(sub->get_name(), opt);
  } catch (const ConfigError& e) {
    std::cerr << "config error";
    if (e.line() > 0) std::cerr << " (line " << e.line() << ")";
    if (!e.field().empty()) std::cerr << " [" << e.field() << "]";
    std::cerr << ": " << e.what() << "\n";
    return exit_code::usage;
  }
  return exit_code::usage;
}
