#include "eqlift/catalog.hpp"
#include "eqlift/errors.hpp"
#include "eqlift/lifting.hpp"
#include "eqlift/numerics.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>

using namespace eqlift;
using numerics::two_pi;

namespace {

struct Setup {
  ScenarioPtr sc;
  BundlePtr bundle;
  ConnectionData conn;
  MomentMapData mu;
  EquivariantTwoForm eq2() const { return {curvature(conn), mu}; }
};

Setup make(const std::string& id, int degree, const catalog::ConnectionParams& p = {}, VecX offsets = VecX()) {
  auto sc = catalog::scenario(id);
  auto b = catalog::bundle(sc, degree);
  if (offsets.size() == 0) offsets = VecX::Zero(sc->action.rank);
  return {sc, b, catalog::connection(b, p), catalog::moment_map(b, p, offsets)};
}

VecX vec(std::initializer_list<double> v) {
  VecX out(static_cast<Eigen::Index>(v.size()));
  int i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

double worst_monodromy(const ConnectionData& conn, const MomentMapData& mu) {
  double w = 0.0;
  for (const Complex& M : generator_monodromy(conn, mu, conn.scenario().action)) w = std::max(w, std::abs(M - 1.0));
  return w;
}

}  // namespace

TEST_CASE("orbit class maps of the catalog") {
  const auto t = orbit_class_map(*catalog::scenario("torus2-translate"));
  CHECK(t.k() == 1);
  CHECK(t.betti1() == 2);
  CHECK(t.rank == 1);
  CHECK(t.C_int(0, 0) == 1);
  CHECK(t.C_int(0, 1) == 0);
  CHECK(t.rounding < 1e-8);

  const auto d = orbit_class_map(*catalog::scenario("torus2-diag"));
  CHECK(d.rank == 2);
  CHECK((d.C_int - IntMat::Identity(2, 2)).cwiseAbs().maxCoeff() == 0);
  CHECK(std::abs(lattice::bareiss_determinant<long long>(d.U)) == 1);

  for (const char* id : {"sphere2-rotate", "sphere2-trivial"}) {
    const auto s = orbit_class_map(*catalog::scenario(id));
    CHECK(s.betti1() == 0);
    CHECK(s.rank == 0);
    CHECK(s.lambda0(0)(0) == doctest::Approx(1.0));
  }
  CHECK(t.to_json()["rank"] == 1);
}

TEST_CASE("classification verdicts and dimensions") {
  catalog::ConnectionParams p;
  p.flat_a = 0.4;
  p.beta = 0.2;
  auto t = make("torus2-translate", 0, p, vec({0.3}));
  const auto rt = classify_lifts(t.conn, t.eq2());
  CHECK(rt.verdict == "lift");
  CHECK(rt.exists);
  CHECK(rt.dimension == 1);
  REQUIRE(rt.torus);
  CHECK(rt.torus->dimension == 1);
  CHECK(rt.torus->components == 1);
  CHECK(rt.torus->residual < 1e-8);

  auto d = make("torus2-diag", 0, catalog::ConnectionParams{0.1, 0.7, 0, 0, 0.05}, vec({0.2, -0.6}));
  const auto rd = classify_lifts(d.conn, d.eq2());
  CHECK(rd.verdict == "lift");
  CHECK(rd.dimension == 0);

  auto s = make("sphere2-rotate", 2, catalog::ConnectionParams{0, 0, 0, 0.2, 0.1});
  const auto rs = classify_lifts(s.conn, s.eq2());
  CHECK(rs.verdict == "lift");
  CHECK(rs.dimension == 0);
  CHECK(rs.hamiltonian_full_torus);
  CHECK(rs.mu_shifts["fixed_weight_family"].size() == 5);

  auto h = make("sphere2-rotate", 1, {}, vec({0.5}));
  const auto rh = classify_lifts(h.conn, h.eq2());
  CHECK(rh.verdict == "no lift");
  CHECK_FALSE(rh.exists);
  CHECK(rh.reason.find("not integral") != std::string::npos);

  // a moment map that does not partner the curvature
  auto wrong = make("sphere2-rotate", 2);
  wrong.mu = catalog::moment_map(catalog::bundle(wrong.sc, 1));
  CHECK(classify_lifts(wrong.conn, wrong.eq2()).verdict == "no lift");

  // alpha must be the curvature of the given connection
  auto other = make("sphere2-rotate", 1);
  EquivariantTwoForm e2 = other.eq2();
  e2.alpha = 2.0 * e2.alpha;
  CHECK_THROWS_AS(classify_lifts(other.conn, e2), PreconditionError);
}

TEST_CASE("the solved family is complete and nothing outside it lifts") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-3, 3);
  for (int trial = 0; trial < 5; ++trial) {
    catalog::ConnectionParams p;
    p.flat_a = u(rng);
    p.flat_b = u(rng);
    p.beta = 0.3;
    auto t = make("torus2-translate", 0, p, vec({u(rng)}));
    const auto ocm = orbit_class_map(*t.sc);
    const LiftingTorus L = solve_lifting_shift(t.conn, t.mu, t.sc->action, ocm);
    CHECK(worst_monodromy(L.solved, t.mu) < 1e-8);
    for (int i = 0; i < 10; ++i) {
      const VecX theta = vec({u(rng)});
      CHECK(worst_monodromy(L.member(theta), t.mu) < 1e-8);
    }
    // shifting by delta along a Lambda_1 direction breaks the lift
    for (double delta : {0.1, 0.25, 0.5, 0.9}) {
      VecX shift = L.particular;
      shift(0) += delta;
      const auto off = shift_connection(t.conn, catalog::h1_shift(*t.sc, shift));
      const double predicted = std::abs(std::polar(1.0, two_pi<double> * delta) - 1.0);
      CHECK(worst_monodromy(off, t.mu) == doctest::Approx(predicted).epsilon(1e-6));
      CHECK(worst_monodromy(off, t.mu) >= 2 * std::sin(numerics::two_pi<double> / 2 * 0.1) - 1e-9);
    }
    // integer shifts of Lambda_1 directions are gauge-equivalent and still lift
    VecX integral = L.particular;
    integral(0) += 1.0;
    CHECK(worst_monodromy(shift_connection(t.conn, catalog::h1_shift(*t.sc, integral)), t.mu) < 1e-8);
  }
  CHECK_THROWS_AS(solve_lifting_shift(make("torus2-translate", 0).conn, make("torus2-translate", 0).mu,
                                      catalog::scenario("torus2-translate")->action,
                                      orbit_class_map(*catalog::scenario("torus2-translate")))
                      .member(vec({1, 2})),
                  PreconditionError);
}

TEST_CASE("a null-homologous direction with nontrivial monodromy gives CertificateError") {
  auto s = make("sphere2-trivial", 1, {}, vec({0.3}));
  const auto ocm = orbit_class_map(*s.sc);
  CHECK_THROWS_AS(solve_lifting_shift(s.conn, s.mu, s.sc->action, ocm), CertificateError);
  auto r = make("sphere2-rotate", 1, {}, vec({0.5}));
  CHECK_THROWS_AS(solve_lifting_shift(r.conn, r.mu, r.sc->action, orbit_class_map(*r.sc)), CertificateError);
}

TEST_CASE("a non-integral orbit lattice gives IntegralityError") {
  catalog::ConnectionParams p;
  p.flat_a = 0.3;
  auto t = make("torus2-translate", 0, p);
  OrbitClassMap ocm = orbit_class_map(*t.sc);
  ocm.C(0, 0) = 2.0;
  ocm.C_int(0, 0) = 2;
  ocm.H(0, 0) = 2;
  CHECK_THROWS_AS(solve_lifting_shift(t.conn, t.mu, t.sc->action, ocm), IntegralityError);
}

TEST_CASE("the lifted action is periodic, additive and covers the base action") {
  auto t = make("torus2-diag", 0, catalog::ConnectionParams{0.15, -0.35, 0, 0, 0.1}, vec({0.1, 0.4}));
  const auto L = solve_lifting_shift(t.conn, t.mu, t.sc->action, orbit_class_map(*t.sc));
  const LiftedAction nu{L.solved, t.mu, t.sc->action, 256};
  std::mt19937_64 rng(43);
  std::uniform_real_distribution<double> u(-1, 1);
  for (int i = 0; i < 5; ++i) {
    const VecX q = catalog::random_point(*t.sc, rng);
    const FiberPoint y{t.sc->manifold->locate(q), std::polar(1.0, u(rng))};
    for (int j = 0; j < 2; ++j) {
      VecX e = VecX::Zero(2);
      e(j) = 1;
      CHECK(fiber_distance(*L.solved.bundle, nu(e, y), y) < 1e-7);
    }
    const VecX s = vec({u(rng), u(rng)}), r = vec({u(rng), u(rng)});
    CHECK(fiber_distance(*L.solved.bundle, nu(s + r, y), nu(s, nu(r, y))) < 1e-7);
    const FiberPoint moved = nu(s, y);
    CHECK(t.sc->manifold->distance(t.sc->manifold->ambient(moved.base), t.sc->action.flow(s, 1.0, q)) < 1e-9);
    CHECK(std::abs(std::abs(moved.value) - 1.0) < 1e-9);
    const FiberPoint scaled{y.base, 2.0 * y.value};
    CHECK(std::abs(nu(s, scaled).value - 2.0 * moved.value) < 1e-9);
  }
  // without the shift the generators do not close up
  const LiftedAction raw{t.conn, t.mu, t.sc->action, 256};
  const FiberPoint y{t.sc->manifold->locate(t.sc->base_point), 1.0};
  CHECK(fiber_distance(*t.conn.bundle, raw(vec({1, 0}), y), y) > 0.1);
  auto sp = make("sphere2-rotate", 3, catalog::ConnectionParams{0, 0, 0, 0.4, 0.2});
  const FiberPoint ys{sp.sc->manifold->locate(sp.sc->base_point), 1.0};
  CHECK_THROWS_AS(exponentiate_lift(sp.conn, sp.mu, sp.sc->action, vec({1}), ys, 2), AccuracyError);
}

TEST_CASE("Hamiltonian power lifts") {
  for (int k : {1, 2}) {
    for (int d : {1, 2, 3}) {
      CAPTURE(k);
      CAPTURE(d);
      auto s = make("sphere2-rotate", k, catalog::ConnectionParams{0, 0, 0, 0.2, 0.1});
      const HamiltonianLift H = hamiltonian_power_lift(s.sc, s.bundle, s.conn, d);
      CHECK(H.bundle->degree == k * d);
      CHECK(H.moment.pass);
      CHECK(H.integrality.pass);
      CHECK(H.torus.residual < 1e-8);
      CHECK(H.weight_difference == doctest::Approx(k * d).epsilon(1e-9));
      for (double w : H.fixed_weights) CHECK(std::abs(w - std::round(w)) < 1e-8);
      CHECK(H.averaging_idempotence < 1e-9);
      CHECK(H.eta_invariance < 1e-8);
      CHECK(H.transport_invariance < 1e-6);
      if (k == 1 && d == 2) CHECK(H.to_json()["weight_difference"].get<double>() == doctest::Approx(2.0));
    }
  }
  auto triv = make("sphere2-trivial", 1);
  const HamiltonianLift T = hamiltonian_power_lift(triv.sc, triv.bundle, triv.conn, 2);
  CHECK(T.weight_difference == doctest::Approx(0.0));
  auto t = make("torus2-translate", 0);
  CHECK_THROWS_AS(hamiltonian_power_lift(t.sc, t.bundle, t.conn, 2), PreconditionError);
}

TEST_CASE("rationalizing the sqrt 2 class") {
  auto sc = catalog::scenario("sphere2-rotate");
  const double r2 = std::sqrt(2.0);
  const TwoForm omega = (0.5 * r2) * catalog::area_form(sc);
  const MomentMapData mu = (r2 * catalog::moment_map(catalog::bundle(sc, 1))).shifted(vec({-0.3}));
  const RationalizedClass R = rationalize_class(omega, mu, *sc, 0.01);
  CHECK(R.achieved);
  CHECK(R.periods.at(0) == lattice::Rational(7, 5));
  CHECK(R.k == 5);
  CHECK(R.c0_distance < 0.01);
  CHECK(R.scale == doctest::Approx(1.4 / r2));
  std::vector<lattice::Rational> fv = R.fixed_values;
  std::sort(fv.begin(), fv.end());
  REQUIRE(fv.size() == 2);
  CHECK(fv[0] == lattice::Rational(-1, 5));
  CHECK(fv[1] == lattice::Rational(6, 5));
  // k omega' is integral and mu' still partners omega' = i alpha'
  const double kp = R.k * integrate_two_form(R.omega, sc->two_cycles[0], 128).real() / two_pi<double>;
  CHECK(std::abs(kp - std::round(kp)) < 1e-8);
  TwoForm alpha = (-1.0) * R.omega;
  alpha.imaginary = true;
  CHECK(check_moment_equation({alpha, R.mu}, sc->action, sc->sample_points).residual < 1e-6);
  for (const auto& v : R.fixed_values) CHECK((lattice::Rational(R.k) * v).denominator() == 1);

  const RationalizedClass loose = rationalize_class(omega, mu, *sc, 10.0);
  CHECK(loose.k == 1);
  CHECK(loose.achieved);

  const RationalizedClass integral = rationalize_class(0.5 * catalog::area_form(sc), catalog::moment_map(catalog::bundle(sc, 1)), *sc, 1e-3);
  CHECK(integral.k == 1);
  CHECK(integral.scale == doctest::Approx(1.0).epsilon(1e-9));

  const RationalizedClass capped = rationalize_class(omega, mu, *sc, 1e-9, 10);
  CHECK_FALSE(capped.achieved);
  CHECK(capped.k == 0);
  CHECK(capped.message.find("achievable bound") != std::string::npos);

  CHECK_THROWS_AS(rationalize_class(omega, mu, *sc, -1.0), PreconditionError);
  const RationalizedClass neg = rationalize_class((-1.0) * omega, (-1.0) * mu, *sc, 0.01);
  CHECK(neg.periods.at(0) == lattice::Rational(-7, 5));
  CHECK(neg.k == 5);
}

TEST_CASE("rationalization preconditions") {
  auto sc = catalog::scenario("sphere2-rotate");
  const MomentMapData mu = catalog::moment_map(catalog::bundle(sc, 1));
  TwoForm imag = catalog::area_form(sc);
  imag.imaginary = true;
  CHECK_THROWS_AS(rationalize_class(imag, mu, *sc, 0.1), PreconditionError);
  CHECK_THROWS_AS(rationalize_class(TwoForm::zero(sc->manifold), mu, *sc, 0.1), PreconditionError);
}
