#include "eqlift/experiment.hpp"

#include "eqlift/errors.hpp"
#include "eqlift/numerics.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

namespace eqlift {

namespace fs = std::filesystem;
using numerics::two_pi;

// --- config -----------------------------------------------------------------------

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value, int line) {
  T out{};
  const char* first = value.data();
  const char* last = first + value.size();
  if (!value.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last)
    throw ConfigError("line " + std::to_string(line) + ": '" + key + "' expects a number, got '" + value + "'",
                      line, key);
  return out;
}

bool parse_bool(const std::string& key, const std::string& value, int line) {
  if (value == "true" || value == "yes" || value == "1") return true;
  if (value == "false" || value == "no" || value == "0") return false;
  throw ConfigError("line " + std::to_string(line) + ": '" + key + "' expects true or false", line, key);
}

const std::set<std::string>& pipelines() {
  static const std::set<std::string> p{"check", "solve", "classify", "lift", "hamiltonian", "rationalize"};
  return p;
}

}  // namespace

void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value, int line) {
  auto num = [&](auto tag) { return parse_number<decltype(tag)>(key, value, line); };
  auto& p = cfg.params;
  auto& q = cfg.quadrature;
  if (key == "name") cfg.name = value;
  else if (key == "scenario") cfg.scenario = value;
  else if (key == "pipeline") cfg.pipeline = value;
  else if (key == "degree") cfg.degree = num(int{});
  else if (key == "flat_a") p.flat_a = num(double{});
  else if (key == "flat_b") p.flat_b = num(double{});
  else if (key == "beta") p.beta = num(double{});
  else if (key == "twist") p.twist = num(double{});
  else if (key == "wobble") p.wobble = num(double{});
  else if (key == "mu_offsets") {
    cfg.mu_offsets.clear();
    std::istringstream is(value);
    std::string tok;
    while (is >> tok) cfg.mu_offsets.push_back(parse_number<double>(key, tok, line));
  }
  else if (key == "power") cfg.power = num(int{});
  else if (key == "epsilon") cfg.epsilon = num(double{});
  else if (key == "omega_scale") cfg.omega_scale = value == "sqrt2" ? std::sqrt(2.0) : num(double{});
  else if (key == "max_denominator") cfg.max_denominator = num(std::int64_t{});
  else if (key == "tol") cfg.tol = num(double{});
  else if (key == "line_steps") q.line_steps = num(int{});
  else if (key == "surface_grid") q.surface_grid = num(int{});
  else if (key == "ode_steps") q.ode_steps = num(int{});
  else if (key == "average_grid") q.average_grid = num(int{});
  else if (key == "seed") cfg.seed = num(std::uint64_t{});
  else if (key == "samples") cfg.samples = num(int{});
  else if (key == "expect") {
    if (value == "lift") cfg.expect_lift = true;
    else if (value == "no-lift") cfg.expect_lift = false;
    else throw ConfigError("line " + std::to_string(line) + ": 'expect' must be lift or no-lift", line, key);
  }
  else if (key == "expect_dimension") cfg.expect_dimension = num(int{});
  else if (key == "report_timing") cfg.report_timing = parse_bool(key, value, line);
  else throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'", line, key);
}

namespace {

void apply_text(ExperimentConfig& cfg, std::string_view text) {
  std::istringstream is{std::string(text)};
  std::string raw;
  int line = 0;
  while (std::getline(is, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(std::string_view(raw).substr(0, hash));
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line) + ": expected 'key = value'", line, s);
    const std::string key = trim(std::string_view(s).substr(0, eq));
    const std::string value = trim(std::string_view(s).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line) + ": missing key", line, {});
    set_config_value(cfg, key, value, line);
  }
}

}  // namespace

ExperimentConfig parse_config(std::string_view text, std::string name) {
  ExperimentConfig cfg;
  cfg.name = std::move(name);
  apply_text(cfg, text);
  validate(cfg);
  return cfg;
}

void apply_overrides(ExperimentConfig& cfg, std::string_view text) {
  apply_text(cfg, text);
  validate(cfg);
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.stem().string());
}

void validate(const ExperimentConfig& cfg) {
  const auto ids = catalog::scenario_ids();
  if (cfg.scenario.empty()) throw ConfigError("missing 'scenario'", 0, "scenario");
  if (std::find(ids.begin(), ids.end(), cfg.scenario) == ids.end())
    throw ConfigError("unknown scenario '" + cfg.scenario + "'", 0, "scenario");
  if (!pipelines().count(cfg.pipeline)) throw ConfigError("unknown pipeline '" + cfg.pipeline + "'", 0, "pipeline");
  if (!(cfg.tol > 0)) throw ConfigError("'tol' must be positive", 0, "tol");
  if (!(cfg.epsilon > 0)) throw ConfigError("'epsilon' must be positive", 0, "epsilon");
  if (cfg.quadrature.line_steps < 16) throw ConfigError("'line_steps' must be >= 16", 0, "line_steps");
  if (cfg.quadrature.surface_grid < 2) throw ConfigError("'surface_grid' must be >= 2", 0, "surface_grid");
  if (cfg.quadrature.ode_steps < 1) throw ConfigError("'ode_steps' must be positive", 0, "ode_steps");
  if (cfg.quadrature.average_grid < 1) throw ConfigError("'average_grid' must be positive", 0, "average_grid");
  if (cfg.samples < 1) throw ConfigError("'samples' must be positive", 0, "samples");
  if (cfg.max_denominator < 1) throw ConfigError("'max_denominator' must be positive", 0, "max_denominator");
}

nlohmann::json to_json(const ExperimentConfig& cfg) {
  nlohmann::json j = {{"name", cfg.name},
                      {"scenario", cfg.scenario},
                      {"pipeline", cfg.pipeline},
                      {"degree", cfg.degree},
                      {"connection", catalog::to_json(cfg.params)},
                      {"mu_offsets", cfg.mu_offsets},
                      {"power", cfg.power},
                      {"epsilon", cfg.epsilon},
                      {"omega_scale", cfg.omega_scale},
                      {"max_denominator", cfg.max_denominator},
                      {"tol", cfg.tol},
                      {"quadrature",
                       {{"line_steps", cfg.quadrature.line_steps},
                        {"surface_grid", cfg.quadrature.surface_grid},
                        {"ode_steps", cfg.quadrature.ode_steps},
                        {"average_grid", cfg.quadrature.average_grid}}},
                      {"seed", cfg.seed},
                      {"samples", cfg.samples},
                      {"report_timing", cfg.report_timing}};
  j["expect"] = cfg.expect_lift ? nlohmann::json(*cfg.expect_lift ? "lift" : "no-lift") : nlohmann::json();
  j["expect_dimension"] = cfg.expect_dimension ? nlohmann::json(*cfg.expect_dimension) : nlohmann::json();
  return j;
}

// --- pipelines --------------------------------------------------------------------

namespace {

nlohmann::json cjson(const Complex& z) { return {z.real(), z.imag()}; }
nlohmann::json vjson(const VecX& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

VecX unit(int rank, int j) {
  VecX e = VecX::Zero(rank);
  e(j) = 1.0;
  return e;
}

class Checks {
 public:
  void add(const std::string& name, double residual, double tol, std::string note = {}) {
    add_if(name, residual, tol, residual <= tol, std::move(note));
  }
  void add_if(const std::string& name, double residual, double tol, bool pass, std::string note = {}) {
    nlohmann::json j = {{"name", name}, {"residual", residual}, {"tolerance", tol}, {"pass", pass}};
    if (!note.empty()) j["note"] = note;
    list_.push_back(j);
    ++total_;
    if (pass) ++passed_;
  }
  void skip(const std::string& name, const std::string& why) {
    skipped_.push_back({{"name", name}, {"reason", why}});
  }
  int passed() const { return passed_; }
  int total() const { return total_; }
  nlohmann::json json() const { return {{"list", list_}, {"skipped", skipped_}}; }

 private:
  nlohmann::json list_ = nlohmann::json::array();
  nlohmann::json skipped_ = nlohmann::json::array();
  int passed_ = 0, total_ = 0;
};

struct Setup {
  ScenarioPtr sc;
  BundlePtr bundle;
  ConnectionData conn;
  MomentMapData mu;
};

Setup make_setup(const ExperimentConfig& cfg) {
  Setup s;
  s.sc = catalog::scenario(cfg.scenario, cfg.quadrature);
  s.bundle = catalog::bundle(s.sc, cfg.degree);
  s.conn = catalog::connection(s.bundle, cfg.params);
  const int rank = s.sc->action.rank;
  VecX off = VecX::Zero(rank);
  if (!cfg.mu_offsets.empty()) {
    if (static_cast<int>(cfg.mu_offsets.size()) != rank)
      throw PreconditionError("mu_offsets needs " + std::to_string(rank) + " entries for " + cfg.scenario);
    for (int j = 0; j < rank; ++j) off(j) = cfg.mu_offsets[j];
  }
  s.mu = catalog::moment_map(s.bundle, cfg.params, off);
  return s;
}

double max_pairwise(const std::vector<Complex>& zs) {
  double worst = 0.0;
  for (std::size_t i = 0; i < zs.size(); ++i)
    for (std::size_t j = i + 1; j < zs.size(); ++j) worst = std::max(worst, std::abs(zs[i] - zs[j]));
  return worst;
}

nlohmann::json monodromy_table(const Setup& s, int ode_steps) {
  const auto& sc = *s.sc;
  nlohmann::json rows = nlohmann::json::array();
  std::vector<VecX> points{sc.base_point};
  for (int i = 0; i < 3; ++i) points.push_back(sc.sample_points[(11 * i + 5) % sc.sample_points.size()]);
  for (int j = 0; j < sc.action.rank; ++j)
    for (const VecX& x : points) {
      const auto f = monodromy_formula(s.conn, s.mu, sc.action, unit(sc.action.rank, j), x);
      const auto o = monodromy_ode(s.conn, s.mu, sc.action, unit(sc.action.rank, j), x, ode_steps);
      rows.push_back({{"gamma", vjson(f.gamma)}, {"x", vjson(x)}, {"formula", cjson(f.phase)},
                      {"ode", cjson(o.phase)}, {"difference", std::abs(f.phase - o.phase)}});
    }
  return rows;
}

void run_check(const ExperimentConfig& cfg, const Setup& s, Checks& checks, nlohmann::json& doc) {
  const ManifoldScenario& sc = *s.sc;
  const TorusAction& action = sc.action;
  const int rank = action.rank;
  std::mt19937_64 rng(cfg.seed);
  const int ode = cfg.quadrature.ode_steps;

  // geometry
  checks.add("transition maps", transition_residual(sc), 1e-10);
  if (sc.betti1 > 0) {
    checks.add("h1 pairing identity",
               (h1_pairing_matrix(sc, cfg.quadrature.line_steps) - MatX::Identity(sc.betti1, sc.betti1)).cwiseAbs().maxCoeff(),
               1e-8);
    double closed = 0.0;
    for (const auto& h : sc.h1_basis) closed = std::max(closed, closedness_residual(h, sc.sample_points));
    checks.add("h1 basis closed", closed, 1e-6);
  }
  // bundle and connection
  checks.add("cocycle identity", cocycle_residual(*s.bundle), 1e-10);
  checks.add("unitarity", unitarity_residual(*s.bundle), 1e-10);
  checks.add("connection compatibility", compatibility_residual(s.conn), 1e-8);
  checks.add("curvature overlap", overlap_residual(curvature(s.conn), sc.sample_points), 1e-8);
  checks.add("analytic exterior derivative", exterior_derivative_residual(s.conn.forms, sc.sample_points), 1e-5);

  // Cartan data
  const EquivariantTwoForm eq2{curvature(s.conn), s.mu};
  const ResidualReport moment = check_moment_equation(eq2, action, sc.sample_points, cfg.tol);
  checks.add("moment equation", moment.residual, cfg.tol);
  checks.add("alpha invariance", alpha_invariance_residual(eq2.alpha, action, sc.sample_points), 1e-7);
  checks.add("mu orbit invariance", moment_orbit_residual(s.mu, action, sc.sample_points), 1e-7);
  const IntegralityReport integ = check_integrality(eq2, action, *s.bundle, cfg.tol);
  doc["integrality"] = integ.to_json();
  checks.add_if("integrality", integ.worst_residual, cfg.tol, integ.pass, integ.certificate);

  // quadrature doubling
  const auto& fc = sc.two_cycles[0];
  const double p1 = restrict_class(eq2, sc).periods[0];
  const double p2 = (Complex(0, 1) * integrate_two_form(eq2.alpha, fc, 2 * cfg.quadrature.surface_grid)).real() / two_pi<double>;
  checks.add("surface quadrature doubling", std::abs(p1 - p2), 1e-7);
  {
    const PathSpec loop = orbit_loop(sc, unit(rank, 0), sc.base_point);
    const Complex h1 = parallel_transport(s.conn, loop, cfg.quadrature.line_steps);
    const Complex h2 = parallel_transport(s.conn, loop, 2 * cfg.quadrature.line_steps);
    checks.add("line quadrature doubling", std::abs(h1 - h2), 1e-7);
  }

  // formula vs ODE oracle
  double oracle = 0.0;
  for (int i = 0; i < cfg.samples; ++i) {
    const VecX g = catalog::random_lattice_vector(rank, rng);
    const VecX x = catalog::random_point(sc, rng);
    const auto f = monodromy_formula(s.conn, s.mu, action, g, x);
    const auto o = monodromy_ode(s.conn, s.mu, action, g, x, ode);
    oracle = std::max(oracle, std::abs(f.phase - o.phase));
  }
  checks.add("formula vs ode", oracle, 1e-6);

  // gauge invariance and shift law
  double gauge = 0.0, shift = 0.0;
  for (int i = 0; i < cfg.samples; ++i) {
    const VecX g = catalog::random_lattice_vector(rank, rng);
    const VecX x = catalog::random_point(sc, rng);
    const Complex M = monodromy_formula(s.conn, s.mu, action, g, x).phase;
    const ConnectionData gauged = apply_gauge(s.conn, catalog::random_gauge(s.sc, rng));
    gauge = std::max(gauge, std::abs(monodromy_formula(gauged, s.mu, action, g, x).phase - M));
    const OneForm eta = catalog::random_closed_form(s.sc, rng);
    const Complex loop = integrate_one_form(eta, orbit_loop(sc, g, x), cfg.quadrature.line_steps);
    const Complex Ms = monodromy_formula(shift_connection(s.conn, eta), s.mu, action, g, x).phase;
    shift = std::max(shift, std::abs(Ms - M * std::exp(-loop)));
  }
  checks.add("gauge invariance", gauge, 1e-8);
  checks.add("shift law", shift, 1e-8);

  // additivity
  double add = 0.0;
  for (int i = 0; i < cfg.samples; ++i) {
    const VecX g1 = catalog::random_lattice_vector(rank, rng), g2 = catalog::random_lattice_vector(rank, rng);
    const VecX x = catalog::random_point(sc, rng);
    if ((g1 + g2).isZero()) continue;
    const Complex a = monodromy_formula(s.conn, s.mu, action, g1 + g2, x).phase;
    const Complex b = monodromy_formula(s.conn, s.mu, action, g1, x).phase *
                      monodromy_formula(s.conn, s.mu, action, g2, x).phase;
    add = std::max(add, std::abs(a - b));
  }
  checks.add("additivity", add, 1e-7);

  // constancy over base points
  double constancy = 0.0;
  for (int j = 0; j < rank; ++j) {
    std::vector<Complex> values;
    for (int i = 0; i < 20; ++i)
      values.push_back(monodromy_formula(s.conn, s.mu, action, unit(rank, j), catalog::random_point(sc, rng)).phase);
    constancy = std::max(constancy, max_pairwise(values));
  }
  checks.add("constancy", constancy, 1e-6);

  // homologous-to-zero
  const OrbitClassMap ocm = orbit_class_map(sc);
  if (ocm.rank == 0 && integ.pass && moment.pass) {
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
      VecX x = sc.base_point;
      if (catalog::is_sphere(sc)) {
        const double theta = std::numbers::pi * (i + 0.5) / 20;
        x = VecX(3);
        x << std::sin(theta) * std::cos(0.3), std::sin(theta) * std::sin(0.3), std::cos(theta);
      }
      for (int j = 0; j < rank; ++j)
        worst = std::max(worst, std::abs(monodromy_formula(s.conn, s.mu, action, unit(rank, j), x).phase - 1.0));
    }
    checks.add("homologous to zero", worst, 1e-6);
  } else {
    checks.skip("homologous to zero", ocm.rank ? "orbits carry homology" : "class is not integral");
  }
  checks.skip("conjugation invariance", "abelian group: M_{g gamma g^-1} = M_gamma holds identically");
  doc["orbit_class_map"] = ocm.to_json();
  doc["monodromy_table"] = monodromy_table(s, ode);
}

void judge_existence(const ExperimentConfig& cfg, bool exists, Checks& checks) {
  const bool want = cfg.expect_lift.value_or(true);
  checks.add_if(want ? "lift exists" : "no lift", exists == want ? 0.0 : 1.0, 0.0, exists == want);
}

void run_classify(const ExperimentConfig& cfg, const Setup& s, Checks& checks, nlohmann::json& doc, bool solve_only) {
  const ClassificationReport rep = classify_lifts(s.conn, {curvature(s.conn), s.mu}, cfg.tol);
  doc[solve_only ? "solve" : "classification"] = rep.to_json();
  judge_existence(cfg, rep.exists, checks);
  if (rep.torus) checks.add("solved monodromy", rep.torus->residual, cfg.tol);
  if (!solve_only) {
    checks.add("dimension = b1 - r", std::abs(rep.dimension - (rep.betti1 - rep.rank)), 0.0);
    if (cfg.expect_dimension)
      checks.add("expected dimension", std::abs(rep.dimension - *cfg.expect_dimension), 0.0);
  }
}

void run_lift(const ExperimentConfig& cfg, const Setup& s, Checks& checks, nlohmann::json& doc) {
  const ManifoldScenario& sc = *s.sc;
  const TorusAction& action = sc.action;
  const int rank = action.rank;
  const ClassificationReport rep = classify_lifts(s.conn, {curvature(s.conn), s.mu}, cfg.tol);
  doc["classification"] = rep.to_json();
  judge_existence(cfg, rep.exists, checks);
  const Point x0 = sc.manifold->locate(sc.base_point);
  std::mt19937_64 rng(cfg.seed);
  const int n = cfg.quadrature.ode_steps;

  if (!rep.exists) {
    // the unsolved lift must fail periodicity by exactly the predicted monodromy
    const LiftedAction lift{s.conn, s.mu, action, n};
    double mismatch = 0.0, gap = 0.0;
    nlohmann::json rows = nlohmann::json::array();
    for (int j = 0; j < rank; ++j) {
      const FiberPoint end = lift(unit(rank, j), {x0, 1.0});
      const Complex observed = express_in(*s.bundle, end, x0.chart).value;
      const Complex predicted = monodromy_formula(s.conn, s.mu, action, unit(rank, j), sc.base_point).phase;
      mismatch = std::max(mismatch, std::abs(observed - predicted));
      gap = std::max(gap, std::abs(predicted - 1.0));
      rows.push_back({{"generator", j}, {"observed", cjson(observed)}, {"predicted", cjson(predicted)}});
    }
    doc["periodicity_failure"] = rows;
    checks.add("periodicity fails by the predicted phase", mismatch, 1e-6);
    checks.add_if("periodicity gap", gap, 1e-6, gap > 1e-6, "|M - 1| of the worst generator");
    return;
  }

  const LiftedAction lift{rep.torus->solved, s.mu, action, n};
  double period = 0.0, covering = 0.0, linear = 0.0, law = 0.0;
  for (int j = 0; j < rank; ++j) period = std::max(period, fiber_distance(*s.bundle, lift(unit(rank, j), {x0, 1.0}), {x0, 1.0}));
  for (int i = 0; i < cfg.samples; ++i) {
    const VecX q = catalog::random_point(sc, rng);
    const Point p = sc.manifold->locate(q);
    VecX s1(rank), s2(rank);
    for (int j = 0; j < rank; ++j) {
      s1(j) = std::uniform_real_distribution<double>(-1, 1)(rng);
      s2(j) = std::uniform_real_distribution<double>(-1, 1)(rng);
    }
    const Complex lambda = std::polar(1.0, std::uniform_real_distribution<double>(0, two_pi<double>)(rng));
    const FiberPoint a = lift(s2, lift(s1, {p, lambda}));
    const FiberPoint b = lift(s1 + s2, {p, lambda});
    law = std::max(law, fiber_distance(*s.bundle, a, b));
    covering = std::max(covering, sc.manifold->distance(sc.manifold->ambient(b.base), action.flow(s1 + s2, 1.0, q)));
    const FiberPoint one = lift(s1, {p, 1.0}), two = lift(s1, {p, 2.0 * lambda});
    linear = std::max(linear, std::abs(two.value - 2.0 * lambda * one.value));
    const VecX g = catalog::random_lattice_vector(rank, rng);
    period = std::max(period, fiber_distance(*s.bundle, lift(g, {p, lambda}), {p, lambda}));
  }
  checks.add("lattice periodicity", period, 1e-6);
  checks.add("group law", law, 1e-6);
  checks.add("covers the base action", covering, 1e-8);
  checks.add("linear on fibres", linear, 1e-9);
}

void run_hamiltonian(const ExperimentConfig& cfg, const Setup& s, Checks& checks, nlohmann::json& doc) {
  const HamiltonianLift H = hamiltonian_power_lift(s.sc, s.bundle, s.conn, cfg.power, cfg.tol);
  doc["hamiltonian"] = H.to_json();
  const int expected = s.bundle->degree * cfg.power;
  checks.add("moment equation", H.moment.residual, cfg.tol);
  checks.add_if("integrality", H.integrality.worst_residual, cfg.tol, H.integrality.pass, H.integrality.certificate);
  checks.add("orbit class rank r = 0", H.ocm.rank, 0.0);
  checks.add("pole weight difference = degree", std::abs(H.weight_difference - std::abs(expected)), 1e-6);
  checks.add("averaging idempotent", H.averaging_idempotence, 1e-6);
  checks.add("averaged form invariant", H.eta_invariance, 1e-6);
  checks.add("transport commutes with the lift", H.transport_invariance, 1e-6);
  const Point x0 = s.sc->manifold->locate(s.sc->base_point);
  checks.add("lattice periodicity", fiber_distance(*H.bundle, H.lift(VecX::Ones(1), {x0, 1.0}), {x0, 1.0}), 1e-6);
}

void run_rationalize(const ExperimentConfig& cfg, const Setup& s, Checks& checks, nlohmann::json& doc) {
  const ManifoldScenario& sc = *s.sc;
  // omega = scale * omega_0 with omega_0 of period 2 pi; mu pairs with omega
  // under d mu = (1/2pi) iota_X omega.
  TwoForm omega0 = catalog::is_sphere(sc) ? 0.5 * catalog::area_form(s.sc) : two_pi<double> * catalog::area_form(s.sc);
  const TwoForm omega = cfg.omega_scale * omega0;
  MomentMapData mu0 = catalog::moment_map(catalog::bundle(s.sc, catalog::is_sphere(sc) ? 1 : 0));
  VecX off = VecX::Zero(sc.action.rank);
  for (int j = 0; j < std::min<int>(sc.action.rank, cfg.mu_offsets.size()); ++j) off(j) = cfg.mu_offsets[j];
  const MomentMapData mu = (cfg.omega_scale * mu0).shifted(off);
  const RationalizedClass R = rationalize_class(omega, mu, sc, cfg.epsilon, cfg.max_denominator);
  doc["rationalization"] = R.to_json();
  const bool want = cfg.expect_lift.value_or(true);
  if (!want) {
    checks.add_if("epsilon not achievable", R.c0_distance, cfg.epsilon, !R.achieved, R.message);
    return;
  }
  checks.add_if("C0 distance below epsilon", R.c0_distance, cfg.epsilon, R.achieved && R.c0_distance < cfg.epsilon);
  bool integral = R.k > 0;
  for (const auto& v : R.periods) integral = integral && (v * R.k).denominator() == 1;
  for (const auto& v : R.fixed_values) integral = integral && (v * R.k).denominator() == 1;
  checks.add_if("k times periods and fixed values integral (exact)", integral ? 0.0 : 1.0, 0.0, integral);
  const double period = integrate_two_form(R.omega, sc.two_cycles[0], sc.quadrature.surface_grid).real() / two_pi<double>;
  checks.add("numeric k period integral", std::abs(R.k * period - std::round(R.k * period)), 1e-9);
  if (catalog::is_sphere(sc)) {
    // mu' still partners omega', read as the curvature alpha = -i omega'
    TwoForm alpha = (-1.0) * R.omega;
    alpha.imaginary = true;
    checks.add("moment equation for omega'", check_moment_equation({alpha, R.mu}, sc.action, sc.sample_points).residual,
               cfg.tol);
  }
}

}  // namespace

Report run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  Report rep;
  nlohmann::json doc;
  doc["config"] = to_json(cfg);
  Checks checks;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Setup s = make_setup(cfg);
    if (cfg.pipeline == "check") run_check(cfg, s, checks, doc);
    else if (cfg.pipeline == "solve") run_classify(cfg, s, checks, doc, true);
    else if (cfg.pipeline == "classify") run_classify(cfg, s, checks, doc, false);
    else if (cfg.pipeline == "lift") run_lift(cfg, s, checks, doc);
    else if (cfg.pipeline == "hamiltonian") run_hamiltonian(cfg, s, checks, doc);
    else run_rationalize(cfg, s, checks, doc);
    rep.verdict = checks.passed() == checks.total() ? "pass" : "fail";
    rep.exit_code = rep.verdict == "pass" ? exit_code::pass : exit_code::verdict_failure;
  } catch (const AccuracyError& e) {
    rep.verdict = "error";
    rep.exit_code = exit_code::accuracy;
    doc["error"] = {{"kind", "accuracy"}, {"message", e.what()}};
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    rep.verdict = "error";
    rep.exit_code = exit_code::verdict_failure;
    doc["error"] = {{"kind", "pipeline"}, {"message", e.what()}};
  }
  doc["checks"] = checks.json();
  doc["verdict"] = rep.verdict;
  doc["exit_code"] = rep.exit_code;
  if (cfg.report_timing)
    doc["timing_seconds"] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  rep.checks_passed = checks.passed();
  rep.checks_total = checks.total();
  rep.document = std::move(doc);
  return rep;
}

std::string dump_report(const nlohmann::json& doc) { return doc.dump(2) + "\n"; }

// --- suite ------------------------------------------------------------------------

std::string SuiteResult::csv() const {
  std::ostringstream os;
  os << "name,scenario,pipeline,verdict,exit_code,checks_passed,checks_total,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    os << r.name << ',' << r.scenario << ',' << r.pipeline << ',' << r.verdict << ',' << r.exit_code << ','
       << r.checks_passed << ',' << r.checks_total << ',' << err << '\n';
  }
  return os.str();
}

SuiteResult run_suite(const fs::path& directory, const std::optional<fs::path>& out) {
  if (!fs::is_directory(directory)) throw ConfigError("suite directory '" + directory.string() + "' not found");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(directory))
    if (entry.is_regular_file() && entry.path().extension() == ".cfg") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  if (out) fs::create_directories(*out);

  SuiteResult result;
  for (const auto& file : files) {
    SuiteRow row;
    row.name = file.stem().string();
    try {
      const ExperimentConfig cfg = load_config(file);
      row.scenario = cfg.scenario;
      row.pipeline = cfg.pipeline;
      const Report rep = run_experiment(cfg);
      row.verdict = rep.verdict;
      row.exit_code = rep.exit_code;
      row.checks_passed = rep.checks_passed;
      row.checks_total = rep.checks_total;
      if (rep.document.contains("error")) row.error = rep.document["error"]["message"];
      if (out) std::ofstream(*out / (row.name + ".json")) << dump_report(rep.document);
    } catch (const ConfigError& e) {
      row.verdict = "error";
      row.exit_code = exit_code::usage;
      row.error = e.what();
    }
    if (row.exit_code != exit_code::pass) result.exit_code = exit_code::verdict_failure;
    result.rows.push_back(row);
  }
  if (out) std::ofstream(*out / "summary.csv") << result.csv();
  return result;
}

}  // namespace eqlift
