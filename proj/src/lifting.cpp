#include "eqlift/lifting.hpp"

#include "eqlift/catalog.hpp"
#include "eqlift/errors.hpp"
#include "eqlift/numerics.hpp"

#include <boost/rational.hpp>

#include <cmath>
#include <sstream>

namespace eqlift {

using numerics::two_pi;
using lattice::Rational;
using catalog::h1_shift;

namespace {

nlohmann::json vec_json(const VecX& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

nlohmann::json mat_json(const IntMat& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    std::vector<long long> row(M.cols());
    for (Eigen::Index j = 0; j < M.cols(); ++j) row[j] = M(i, j);
    rows.push_back(row);
  }
  return rows;
}

nlohmann::json complex_json(const Complex& z) { return {z.real(), z.imag()}; }

nlohmann::json rational_json(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

VecX unit(int rank, int j) {
  VecX e = VecX::Zero(rank);
  e(j) = 1.0;
  return e;
}

double one_form_distance(const OneForm& a, const OneForm& b, const std::vector<VecX>& samples) {
  const Manifold& m = *a.manifold;
  double worst = 0.0;
  for (const VecX& q : samples)
    for (int c = 0; c < static_cast<int>(m.charts.size()); ++c) {
      const Vec2 p = m.charts[c].coords(q);
      if (!p.allFinite() || m.charts[c].depth(p) <= 0.05) continue;
      worst = std::max(worst, (a.coefficients({c, p}) - b.coefficients({c, p})).norm());
    }
  return worst;
}

}  // namespace

// --- orbit class map ------------------------------------------------------------

VecX OrbitClassMap::lambda1(int i) const { return U.row(i).cast<double>().transpose(); }
VecX OrbitClassMap::lambda0(int i) const { return U.row(rank + i).cast<double>().transpose(); }

nlohmann::json OrbitClassMap::to_json() const {
  nlohmann::json lambda1_rows = nlohmann::json::array(), lambda0_rows = nlohmann::json::array();
  for (int i = 0; i < rank; ++i) lambda1_rows.push_back(vec_json(lambda1(i)));
  for (int i = 0; i < k() - rank; ++i) lambda0_rows.push_back(vec_json(lambda0(i)));
  return {{"C", mat_json(C_int)}, {"rank", rank}, {"rounding", rounding}, {"hermite", mat_json(H)},
          {"lambda1", lambda1_rows}, {"lambda0", lambda0_rows}};
}

OrbitClassMap orbit_class_map(const ManifoldScenario& sc, double tol) {
  const TorusAction& action = sc.action;
  const int k = action.rank, b1 = sc.betti1;
  OrbitClassMap ocm;
  ocm.C = MatX::Zero(k, b1);
  if (b1 > 0 && !action.acts_trivially)
    for (int j = 0; j < k; ++j)
      ocm.C.row(j) = pair_h1(sc, orbit_loop(sc, unit(k, j), sc.base_point), sc.quadrature.line_steps).transpose();
  ocm.C_int = ocm.C.array().round().cast<long long>().matrix();
  ocm.rounding = k * b1 > 0 ? (ocm.C - ocm.C_int.cast<double>()).cwiseAbs().maxCoeff() : 0.0;
  if (ocm.rounding > tol)
    throw InconsistencyError("orbit class map: entry off an integer by " + std::to_string(ocm.rounding));
  const auto hnf = lattice::hermite_normal_form<long long>(ocm.C_int);
  ocm.U = hnf.U;
  ocm.H = hnf.H;
  ocm.rank = hnf.rank;
  int numeric_rank = 0;
  if (k * b1 > 0) {
    Eigen::JacobiSVD<MatX> svd(ocm.C);
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
      if (svd.singularValues()(i) > tol) ++numeric_rank;
  }
  if (numeric_rank != ocm.rank)
    throw InconsistencyError("orbit class map: integer rank " + std::to_string(ocm.rank) +
                             " differs from numerical rank " + std::to_string(numeric_rank));
  return ocm;
}

// --- solver ---------------------------------------------------------------------

std::vector<Complex> generator_monodromy(const ConnectionData& conn, const MomentMapData& mu,
                                         const TorusAction& action) {
  std::vector<Complex> out;
  for (int j = 0; j < action.rank; ++j)
    out.push_back(monodromy_formula(conn, mu, action, unit(action.rank, j), conn.scenario().base_point).phase);
  return out;
}

VecX LiftingTorus::member_shift(const VecX& theta) const {
  if (theta.size() != dimension) throw PreconditionError("LiftingTorus::member: theta has the wrong length");
  return particular + kernel.cast<double>() * theta;
}

ConnectionData LiftingTorus::member(const VecX& theta) const {
  return shift_connection(base, h1_shift(base.scenario(), member_shift(theta)));
}

nlohmann::json LiftingTorus::to_json() const {
  nlohmann::json base_m = nlohmann::json::array(), solved_m = nlohmann::json::array();
  for (const auto& z : base_monodromy) base_m.push_back(complex_json(z));
  for (const auto& z : solved_monodromy) solved_m.push_back(complex_json(z));
  return {{"dimension", dimension},  {"particular_shift", vec_json(particular)}, {"kernel", mat_json(kernel)},
          {"components", components}, {"log_phases", vec_json(phases)},        {"base_monodromy", base_m},
          {"solved_monodromy", solved_m}, {"residual", residual}};
}

LiftingTorus solve_lifting_shift(const ConnectionData& conn, const MomentMapData& mu, const TorusAction& action,
                                 const OrbitClassMap& ocm, double tol) {
  const ManifoldScenario& sc = conn.scenario();
  const VecX& x = sc.base_point;
  const int b1 = ocm.betti1(), r = ocm.rank, k = ocm.k();
  if (k != action.rank) throw PreconditionError("solve_lifting_shift: orbit class map does not match the action");

  for (int i = 0; i < k - r; ++i) {
    const Complex M = monodromy_formula(conn, mu, action, ocm.lambda0(i), x).phase;
    if (std::abs(M - 1.0) > tol) {
      std::ostringstream os;
      os << "null-homologous lattice direction " << ocm.lambda0(i).transpose() << " has monodromy " << M;
      throw CertificateError(os.str());
    }
  }

  LiftingTorus out;
  out.base = conn;
  out.mu = mu;
  out.ocm = ocm;
  out.base_monodromy = generator_monodromy(conn, mu, action);
  out.phases = VecX::Zero(r);
  for (int i = 0; i < r; ++i)
    out.phases(i) = std::arg(monodromy_formula(conn, mu, action, ocm.lambda1(i), x).phase) / two_pi<double>;

  out.particular = VecX::Zero(b1);
  if (r > 0) {
    const MatX Ht = ocm.H_top().cast<double>();
    out.particular = Ht.completeOrthogonalDecomposition().solve(out.phases);
  }
  out.dimension = b1 - r;
  if (r == 0) {
    out.kernel = IntMat::Identity(b1, b1);
  } else {
    const auto hnf = lattice::hermite_normal_form<long long>(IntMat(ocm.H_top().transpose()));
    out.kernel = hnf.U.bottomRows(b1 - hnf.rank).transpose();
  }
  out.components = lattice::maximal_minor_gcd<long long>(ocm.H_top());

  out.solved = shift_connection(conn, h1_shift(sc, out.particular));
  out.solved_monodromy = generator_monodromy(out.solved, mu, action);
  for (const auto& M : out.solved_monodromy) out.residual = std::max(out.residual, std::abs(M - 1.0));
  if (out.residual > tol)
    throw IntegralityError("solve_lifting_shift: shifted connection keeps monodromy off 1 by " +
                           std::to_string(out.residual));
  return out;
}

// --- classification -------------------------------------------------------------

nlohmann::json ClassificationReport::to_json() const {
  nlohmann::json j = {{"scenario", scenario},    {"betti1", betti1},         {"rank", rank},
                      {"dimension", dimension},  {"exists", exists},         {"verdict", verdict},
                      {"reason", reason},        {"moment", moment.to_json()}, {"integrality", integrality.to_json()},
                      {"hamiltonian_full_torus", hamiltonian_full_torus}, {"mu_shifts", mu_shifts},
                      {"torsion_condition", "holds trivially: catalog H_1 is torsion-free"}};
  j["lifting_torus"] = torus ? torus->to_json() : nlohmann::json();
  return j;
}

ClassificationReport classify_lifts(const ConnectionData& conn, const EquivariantTwoForm& eq2, double tol) {
  const ManifoldScenario& sc = conn.scenario();
  const TorusAction& action = sc.action;
  ClassificationReport rep;
  rep.scenario = sc.name;

  const TwoForm F = curvature(conn);
  double mismatch = 0.0;
  for (const VecX& q : sc.sample_points) {
    const Point p = sc.manifold->locate(q);
    mismatch = std::max(mismatch, std::abs(F.coefficient(p) - eq2.alpha.coefficient(p)));
  }
  if (mismatch > 1e-8) throw PreconditionError("classify_lifts: connection curvature differs from alpha");

  rep.moment = check_moment_equation(eq2, action, sc.sample_points, tol);
  rep.integrality = check_integrality(eq2, action, *conn.bundle, tol);
  const OrbitClassMap ocm = orbit_class_map(sc);
  rep.betti1 = ocm.betti1();
  rep.rank = ocm.rank;
  rep.dimension = rep.betti1 - rep.rank;

  nlohmann::json shifts = {{"lattice", "Z^" + std::to_string(action.rank)},
                           {"note", "integer constants added to mu_j give further lifts"}};
  if (!action.fixed_points.empty()) {
    nlohmann::json table = nlohmann::json::array();
    for (int n = -2; n <= 2; ++n) {
      std::vector<double> weights;
      for (const VecX& fp : action.fixed_points) weights.push_back(eq2.mu.component(0, fp) + n);
      table.push_back({{"offset", n}, {"fixed_weights", weights}});
    }
    shifts["fixed_weight_family"] = table;
  }
  rep.mu_shifts = shifts;

  if (!rep.moment.pass) {
    rep.verdict = "no lift";
    rep.reason = "alpha - mu is not Cartan-closed (residual " + std::to_string(rep.moment.residual) + ")";
    return rep;
  }
  if (!rep.integrality.pass) {
    rep.verdict = "no lift";
    std::string joined;
    for (const auto& o : rep.integrality.offenders) joined += (joined.empty() ? "" : "; ") + o;
    rep.reason = "class is not integral: " + joined;
    return rep;
  }
  try {
    rep.torus = solve_lifting_shift(conn, eq2.mu, action, ocm, tol);
    rep.exists = true;
    rep.verdict = "lift";
    rep.hamiltonian_full_torus = action.hamiltonian && rep.dimension == rep.betti1;
  } catch (const IntegralityError& e) {
    rep.verdict = "no lift";
    rep.reason = e.what();
  } catch (const CertificateError& e) {
    rep.verdict = "no lift";
    rep.reason = e.what();
  }
  return rep;
}

// --- exponentiation -------------------------------------------------------------

double fiber_distance(const LineBundleData& bundle, const FiberPoint& a, const FiberPoint& b) {
  const Manifold& m = *bundle.scenario->manifold;
  const VecX qa = m.ambient(a.base), qb = m.ambient(b.base);
  const double base = m.distance(qa, qb);
  try {
    const int c = m.locate(qa).chart;
    return base + std::abs(express_in(bundle, a, c).value - express_in(bundle, b, c).value);
  } catch (const DomainError&) {
    return base + 2.0;
  }
}

FiberPoint exponentiate_lift(const ConnectionData& conn, const MomentMapData& mu, const TorusAction& action,
                             const VecX& s, const FiberPoint& y, int n_steps) {
  const LiftedFlowResult coarse = integrate_lifted_flow(conn, mu, action, s, y, 1.0, n_steps);
  const LiftedFlowResult fine = integrate_lifted_flow(conn, mu, action, s, y, 1.0, 2 * n_steps);
  const double diff = fiber_distance(*conn.bundle, fine.end, coarse.end);
  if (diff > 1e-6)
    throw AccuracyError("exponentiate_lift: step doubling moved the endpoint by " + std::to_string(diff));
  return fine.end;
}

// --- Hamiltonian pipeline -------------------------------------------------------

nlohmann::json HamiltonianLift::to_json() const {
  return {{"degree", bundle->degree},
          {"moment", moment.to_json()},
          {"integrality", integrality.to_json()},
          {"orbit_class_map", ocm.to_json()},
          {"lifting_torus", torus.to_json()},
          {"fixed_weights", fixed_weights},
          {"weight_difference", weight_difference},
          {"averaging_idempotence", averaging_idempotence},
          {"eta_invariance", eta_invariance},
          {"transport_invariance", transport_invariance}};
}

double transport_invariance_residual(const LiftedAction& full, const ScenarioPtr& sc, int n_checks) {
  const Manifold& m = *sc->manifold;
  LiftedAction lift = full;
  lift.n_steps = std::min(full.n_steps, 256);
  const ConnectionData& conn = lift.conn;
  const int rank = lift.action.rank;
  const int steps = sc->quadrature.line_steps;
  double worst = 0.0;
  for (int i = 0; i < n_checks; ++i) {
    const VecX q0 = sc->sample_points[(7 * i + 3) % sc->sample_points.size()];
    const Point p0 = m.locate(q0);
    const double ang = 0.9 * i + 0.3;
    const Vec2 step = 0.1 * Vec2(std::cos(ang), std::sin(ang));
    const Vec2 p1 = p0.coords + step;
    VecX s(rank);
    for (int j = 0; j < rank; ++j) s(j) = 0.37 + 0.11 * i + 0.05 * j;

    // transport, then act
    const Complex T = parallel_transport(conn, chart_line(p0.chart, p0.coords, p1), steps);
    const FiberPoint lhs = lift(s, {{p0.chart, p1}, T});

    // act, then transport along the moved path
    const FiberPoint moved = lift(s, {p0, 1.0});
    const Chart& src = m.charts[p0.chart];
    const VecX mid = lift.action.flow(s, 1.0, src.embed(p0.coords + 0.5 * step));
    const int c2 = m.locate(mid).chart;
    const Chart& dst = m.charts[c2];
    const Vec2 start = dst.coords(lift.action.flow(s, 1.0, src.embed(p0.coords)));
    PathSegment seg;
    seg.chart = c2;
    seg.t0 = 0.0;
    seg.t1 = 1.0;
    const TorusAction action = lift.action;
    seg.position = [=](double t) {
      return dst.unwrap(dst.coords(action.flow(s, 1.0, src.embed(p0.coords + t * step))), start);
    };
    seg.velocity = [=](double t) -> Vec2 {
      const Vec2 pt = p0.coords + t * step;
      const VecX q = src.embed(pt);
      const VecX v = action.flow_jacobian(s, 1.0, q) * (src.embed_jacobian(pt) * step);
      return dst.coords_jacobian(action.flow(s, 1.0, q)) * v;
    };
    PathSpec path;
    path.segments.push_back(seg);
    const FiberPoint moved_here = express_in(*conn.bundle, moved, c2);
    const Complex T2 = parallel_transport(conn, path, steps);
    const FiberPoint rhs{{c2, seg.position(1.0)}, T2 * moved_here.value};
    worst = std::max(worst, fiber_distance(*conn.bundle, lhs, rhs));
  }
  return worst;
}

HamiltonianLift hamiltonian_power_lift(const ScenarioPtr& sc, const BundlePtr& bundle, const ConnectionData& conn,
                                       int d, double tol) {
  const TorusAction& action = sc->action;
  if (!action.hamiltonian) throw PreconditionError("hamiltonian_power_lift: '" + sc->name + "' is not Hamiltonian");
  if (alpha_invariance_residual(curvature(conn), action, sc->sample_points) > 1e-7)
    throw PreconditionError("hamiltonian_power_lift: curvature is not invariant");

  HamiltonianLift out;
  auto [Ld, tensor] = tensor_power(bundle, conn, d);
  out.bundle = Ld;
  out.tensor = tensor;
  const ConnectionData standard = catalog::connection(catalog::bundle(sc, Ld->degree));
  out.reference = {Ld, standard.forms, standard.descriptor};

  const OneForm diff = connection_difference(tensor, out.reference);
  const int grid = sc->quadrature.average_grid;
  out.eta = average_one_form(diff, action, grid);
  out.averaging_idempotence = one_form_distance(average_one_form(out.eta, action, grid), out.eta, sc->sample_points);
  for (int j = 0; j < action.rank; ++j)
    for (int n = 0; n < 8; ++n)
      out.eta_invariance = std::max(out.eta_invariance,
                                    one_form_distance(pullback(out.eta, action, unit(action.rank, j), (n + 0.37) / 8.0),
                                                      out.eta, sc->sample_points));

  const ConnectionData invariant = shift_connection(out.reference, out.eta);
  const MomentMapData mu = catalog::moment_map(Ld) + cartan_differential(out.eta, *sc).mu;
  const EquivariantTwoForm eq2{curvature(invariant), mu};
  out.moment = check_moment_equation(eq2, action, sc->sample_points, tol);
  out.integrality = check_integrality(eq2, action, *Ld, tol);
  if (!out.moment.pass)
    throw InconsistencyError("hamiltonian_power_lift: moment equation residual " + std::to_string(out.moment.residual));
  if (!out.integrality.pass) throw IntegralityError("hamiltonian_power_lift: averaged class is not integral");

  out.ocm = orbit_class_map(*sc);
  if (out.ocm.rank != 0) throw InconsistencyError("hamiltonian_power_lift: orbits are not null-homologous");
  out.torus = solve_lifting_shift(invariant, mu, action, out.ocm, tol);
  out.lift = {out.torus.solved, mu, action, sc->quadrature.ode_steps};

  for (const VecX& fp : action.fixed_points)
    for (int j = 0; j < mu.rank(); ++j) out.fixed_weights.push_back(mu.component(j, fp));
  if (!out.fixed_weights.empty()) {
    const auto [lo, hi] = std::minmax_element(out.fixed_weights.begin(), out.fixed_weights.end());
    out.weight_difference = *hi - *lo;
  }
  out.transport_invariance = transport_invariance_residual(out.lift, sc);
  return out;
}

// --- rationalization ------------------------------------------------------------

nlohmann::json RationalizedClass::to_json() const {
  nlohmann::json p = nlohmann::json::array(), f = nlohmann::json::array();
  for (const auto& r : periods) p.push_back(rational_json(r));
  for (const auto& r : fixed_values) f.push_back(rational_json(r));
  return {{"k", k}, {"scale", scale}, {"periods", p}, {"fixed_values", f}, {"c0_distance", c0_distance},
          {"epsilon", epsilon}, {"achieved", achieved}, {"message", message}};
}

RationalizedClass rationalize_class(const TwoForm& omega, const MomentMapData& mu, const ManifoldScenario& sc,
                                    double epsilon, std::int64_t max_denominator) {
  if (omega.imaginary) throw PreconditionError("rationalize_class: omega must be a real two-form");
  if (!(epsilon > 0.0)) throw PreconditionError("rationalize_class: epsilon must be positive");
  if (sc.two_cycles.size() != 1) throw PreconditionError("rationalize_class: expects a single fundamental 2-cycle");
  const Manifold& m = *sc.manifold;
  double weakest = std::numeric_limits<double>::infinity();
  for (const VecX& q : sc.sample_points) {
    const Point p = m.locate(q);
    weakest = std::min(weakest, std::abs(omega.coefficient(p)) / m.area_density(p));
  }
  if (!(weakest > 1e-9)) throw PreconditionError("rationalize_class: omega is degenerate at a sample point");

  RationalizedClass out;
  out.epsilon = epsilon;
  const double rho = integrate_two_form(omega, sc.two_cycles[0], sc.quadrature.surface_grid).real() / two_pi<double>;
  const double norm = c0_norm(omega, sc.sample_points);
  const double sign = rho < 0 ? -1.0 : 1.0, arho = std::abs(rho);
  // |1 - (p/q)/rho| |omega| < epsilon
  const double delta = epsilon * arho / norm * (1.0 - 1e-9);
  Rational target;
  try {
    target = lattice::simplest_rational_in(std::max(arho - delta, arho * 1e-12), arho + delta, max_denominator);
  } catch (const std::range_error&) {
    const Rational best(std::llround(arho * max_denominator), max_denominator);
    const double bound = std::abs(1.0 - boost::rational_cast<double>(best) / arho) * norm;
    std::ostringstream os;
    os << "no rational with denominator <= " << max_denominator << " within epsilon; achievable bound " << bound;
    out.omega = omega;
    out.mu = mu;
    out.k = 0;
    out.c0_distance = bound;
    out.message = os.str();
    return out;
  }
  out.scale = boost::rational_cast<double>(target) / arho;
  out.omega = out.scale * omega;
  out.c0_distance = c0_norm((out.scale - 1.0) * omega, sc.sample_points);
  const Rational period = sign < 0 ? -target : target;
  out.periods = {period};

  MomentMapData scaled = out.scale * mu;
  VecX offsets = VecX::Zero(mu.rank());
  const std::int64_t q = target.denominator();
  if (!sc.action.fixed_points.empty()) {
    for (int j = 0; j < mu.rank(); ++j) {
      const double v0 = scaled.component(j, sc.action.fixed_points.front());
      offsets(j) = static_cast<double>(std::llround(q * v0)) / static_cast<double>(q) - v0;
    }
  }
  out.mu = scaled.shifted(offsets);
  for (const VecX& fp : sc.action.fixed_points)
    for (int j = 0; j < mu.rank(); ++j) {
      const double v = out.mu.component(j, fp);
      try {
        out.fixed_values.push_back(lattice::simplest_rational_in(v - 1e-9, v + 1e-9, max_denominator));
      } catch (const std::range_error&) {
        out.message = "fixed-point value " + std::to_string(v) + " is not rational after rescaling";
        out.k = 0;
        return out;
      }
    }
  std::vector<Rational> all = out.periods;
  all.insert(all.end(), out.fixed_values.begin(), out.fixed_values.end());
  out.k = lattice::lcm_of_denominators(all);
  out.achieved = out.c0_distance < epsilon;
  out.message = out.achieved ? "ok" : "C0 distance exceeds epsilon";
  return out;
}

}  // namespace eqlift
