#pragma once

#include "eqlift/catalog.hpp"
#include "eqlift/lifting.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace eqlift {

/// Experiment description, read from `key = value` text. Lines starting with
/// '#' are comments.
struct ExperimentConfig {
  std::string name;
  std::string scenario;
  std::string pipeline = "check";  // check | solve | classify | lift | hamiltonian | rationalize
  int degree = 0;
  catalog::ConnectionParams params;
  std::vector<double> mu_offsets;  // empty: zeros
  int power = 1;
  double epsilon = 0.01;
  double omega_scale = 1.0;
  std::int64_t max_denominator = 1000000;
  double tol = 1e-6;
  QuadratureSettings quadrature;
  std::uint64_t seed = 1;
  int samples = 10;
  std::optional<bool> expect_lift;
  std::optional<int> expect_dimension;
  bool report_timing = false;
};

/// Sets one field; throws ConfigError carrying `line` and the key.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value, int line = 0);
ExperimentConfig parse_config(std::string_view text, std::string name = {});
ExperimentConfig load_config(const std::filesystem::path& path);
/// Applies every entry of an override text on top of cfg.
void apply_overrides(ExperimentConfig& cfg, std::string_view text);
/// Tolerances positive, scenario in the catalog, pipeline known.
void validate(const ExperimentConfig& cfg);
nlohmann::json to_json(const ExperimentConfig& cfg);

namespace exit_code {
constexpr int pass = 0;
constexpr int verdict_failure = 1;
constexpr int usage = 2;
constexpr int accuracy = 3;
}  // namespace exit_code

struct Report {
  nlohmann::json document;
  std::string verdict;  // pass | fail | error
  int exit_code = exit_code::pass;
  int checks_passed = 0;
  int checks_total = 0;
};

Report run_experiment(const ExperimentConfig& cfg);

struct SuiteRow {
  std::string name;
  std::string scenario;
  std::string pipeline;
  std::string verdict;
  int exit_code = 0;
  int checks_passed = 0;
  int checks_total = 0;
  std::string error;
};

struct SuiteResult {
  std::vector<SuiteRow> rows;
  int exit_code = exit_code::pass;
  std::string csv() const;
};

/// Runs every *.cfg in `directory` in name order. When `out` is given, writes
/// <name>.json per experiment and summary.csv there.
SuiteResult run_suite(const std::filesystem::path& directory, const std::optional<std::filesystem::path>& out = {});

std::string dump_report(const nlohmann::json& doc);

}  // namespace eqlift
